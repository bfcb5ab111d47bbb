//! Real quaternions `a + b i + c j + d k`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    pub const ONE: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn real(a: f64) -> Self {
        Self { a, b: 0.0, c: 0.0, d: 0.0 }
    }

    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// `self * conj(other)`, without materializing the conjugate.
    #[inline]
    pub fn mul_conj(self, o: Self) -> Self {
        self * o.conj()
    }

    /// `conj(self) * other`.
    #[inline]
    pub fn conj_mul(self, o: Self) -> Self {
        self.conj() * o
    }

    /// Complex pair `(z1, z2)` with `q = z1 + z2 j`.
    pub fn to_complex_pair(self) -> ((f64, f64), (f64, f64)) {
        ((self.a, self.b), (self.c, self.d))
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[test]
    fn hamilton_relations() {
        assert_eq!(I * I, Quaternion::real(-1.0));
        assert_eq!(J * J, Quaternion::real(-1.0));
        assert_eq!(K * K, Quaternion::real(-1.0));
        assert_eq!(I * J, K);
        assert_eq!(J * K, I);
        assert_eq!(K * I, J);
        assert_eq!(J * I, -K);
    }

    #[test]
    fn norm_is_multiplicative() {
        let p = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        let q = Quaternion::new(-0.3, 0.7, 2.0, -1.0);
        assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-12);
        let (l, r) = ((p * q).conj(), q.conj() * p.conj());
        assert!((l - r).norm() < 1e-12);
        let pp = p * p.conj();
        assert!((pp.a - p.norm_sqr()).abs() < 1e-12 && pp.b.abs() < 1e-12);
    }
}
