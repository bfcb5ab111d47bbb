//! Exact multivariate Laurent polynomials over `Q[N]` and residue extraction.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{inv_factorial, Rational};

/// Polynomial in the formal symbol `N`; `coeffs[p]` multiplies `N^p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormalPolyN {
    coeffs: Vec<Rational>,
}

impl FormalPolyN {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    /// `c N^power`.
    pub fn monomial(c: Rational, power: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Evaluate at a rational value of `N`.
    pub fn eval(&self, n: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * n + c)
    }

    fn add_assign_ref(&mut self, other: &Self) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }
}

impl Add for &FormalPolyN {
    type Output = FormalPolyN;
    fn add(self, rhs: Self) -> FormalPolyN {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Neg for &FormalPolyN {
    type Output = FormalPolyN;
    fn neg(self) -> FormalPolyN {
        FormalPolyN { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Sub for &FormalPolyN {
    type Output = FormalPolyN;
    fn sub(self, rhs: Self) -> FormalPolyN {
        self + &(-rhs)
    }
}

impl Mul for &FormalPolyN {
    type Output = FormalPolyN;
    fn mul(self, rhs: Self) -> FormalPolyN {
        if self.is_zero() || rhs.is_zero() {
            return FormalPolyN::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        FormalPolyN::from_coeffs(coeffs)
    }
}

impl fmt::Display for FormalPolyN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, c)| match p {
                0 => c.to_string(),
                1 => format!("({c})*N"),
                _ => format!("({c})*N^{p}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// Sparse Laurent polynomial in `w_1..w_k` with `FormalPolyN` coefficients,
/// restricted to a per-variable exponent window `[lo, hi]`.
///
/// Products drop every term that lands outside the window. In-window
/// coefficients are exact whenever the operands hold their full support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiLaurent {
    window: Vec<(i32, i32)>,
    terms: BTreeMap<Vec<i32>, FormalPolyN>,
}

impl MultiLaurent {
    pub fn zero(window: Vec<(i32, i32)>) -> Self {
        assert!(window.iter().all(|(lo, hi)| lo <= hi), "empty window");
        Self { window, terms: BTreeMap::new() }
    }

    /// Same window on each of `vars` variables.
    pub fn zero_uniform(vars: usize, lo: i32, hi: i32) -> Self {
        Self::zero(vec![(lo, hi); vars])
    }

    pub fn one(window: Vec<(i32, i32)>) -> Self {
        let vars = window.len();
        let mut out = Self::zero(window);
        out.add_term(vec![0; vars], FormalPolyN::constant(Rational::one()));
        out
    }

    pub fn vars(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[(i32, i32)] {
        &self.window
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &FormalPolyN)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn in_window(&self, exps: &[i32]) -> bool {
        exps.iter().zip(&self.window).all(|(e, (lo, hi))| lo <= e && e <= hi)
    }

    /// Adds `coeff * w^exps`; silently ignored outside the window.
    pub fn add_term(&mut self, exps: Vec<i32>, coeff: FormalPolyN) {
        assert_eq!(exps.len(), self.vars());
        if coeff.is_zero() || !self.in_window(&exps) {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&coeff);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Coefficient of `w^exps`, provided the window covers it.
    pub fn coeff(&self, exps: &[i32]) -> Result<FormalPolyN> {
        if exps.len() != self.vars() {
            return Err(Error::Arity { found: exps.len(), expected: self.vars() });
        }
        for (var, (&e, &(lo, hi))) in exps.iter().zip(&self.window).enumerate() {
            if e < lo || e > hi {
                return Err(Error::WindowTooSmall { var, lo, hi, needed: e });
            }
        }
        Ok(self.terms.get(exps).cloned().unwrap_or_default())
    }

    pub fn scale(&self, c: &FormalPolyN) -> Self {
        let mut out = Self::zero(self.window.clone());
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), -v);
        }
        out
    }

    /// Product truncated to `self`'s window.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars(), other.vars());
        let mut out = Self::zero(self.window.clone());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if out.in_window(&e) {
                    out.add_term(e, ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.window.clone());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Multiplies by `exp(N (w_1 + ... + w_k))`, keeping only the exponents
    /// inside `window`. The exponential is expanded just far enough to reach
    /// the top of the window from each stored term.
    pub fn mul_exp_sum(&self, window: Vec<(i32, i32)>) -> Self {
        assert_eq!(window.len(), self.vars());
        let mut out = Self::zero(window.clone());
        let targets = box_points(&window);
        for (e, c) in &self.terms {
            for f in &targets {
                if f.iter().zip(e).any(|(fi, ei)| fi < ei) {
                    continue;
                }
                let mut scale = Rational::one();
                let mut power = 0usize;
                for (fi, ei) in f.iter().zip(e) {
                    let d = (fi - ei) as u64;
                    scale *= inv_factorial(d);
                    power += d as usize;
                }
                out.add_term(f.clone(), c * &FormalPolyN::monomial(scale, power));
            }
        }
        out
    }
}

fn box_points(window: &[(i32, i32)]) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in window {
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |e| {
                    let mut q = p.clone();
                    q.push(e);
                    q
                })
            })
            .collect();
    }
    out
}

/// `(1/2 pi i)^k \oint ... \oint integrand prod dw_i / w_i^{d_i}`: the
/// coefficient of `prod w_i^{d_i - 1}`.
pub fn contour_extract(integrand: &MultiLaurent, divisor_exponents: &[i32]) -> Result<FormalPolyN> {
    let target: Vec<i32> = divisor_exponents.iter().map(|d| d - 1).collect();
    integrand.coeff(&target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{g_series, int, ratio};


    fn exp_n_w(hi: i32) -> MultiLaurent {
        MultiLaurent::one(vec![(0, 0)]).mul_exp_sum(vec![(0, hi)])
    }

    #[test]
    fn extract_exponential() {
        let e = exp_n_w(6);
        assert_eq!(contour_extract(&e, &[1]).unwrap(), FormalPolyN::constant(int(1)));
        for j in 0..=5 {
            let expect = FormalPolyN::monomial(crate::exact::inv_factorial(j as u64), j);
            assert_eq!(contour_extract(&e, &[j as i32 + 1]).unwrap(), expect);
        }
    }

    #[test]
    fn extract_rejects_small_window() {
        let e = exp_n_w(3);
        assert!(matches!(
            contour_extract(&e, &[6]),
            Err(Error::WindowTooSmall { needed: 5, .. })
        ));
    }

    #[test]
    fn extract_g_series() {
        // [u^j] of the w^m residue of e^{Nw + u/w^2} is the residue of
        // e^{Nw} w^{-2j} / j!, which must be N^{m+2j} [u^j] g_m(u)
        let degree = 4;
        for m in -3..=3i32 {
            let g = g_series(m as i64, degree);
            for j in 0..=degree as i32 {
                let mut p = MultiLaurent::zero_uniform(1, -2 * j, 0);
                p.add_term(vec![-2 * j], FormalPolyN::constant(crate::exact::inv_factorial(j as u64)));
                let integrand = p.mul_exp_sum(vec![(m, m)]);
                let c = contour_extract(&integrand, &[m + 1]).unwrap();
                let expect = if m + 2 * j >= 0 {
                    FormalPolyN::monomial(g.coeff(j as usize), (m + 2 * j) as usize)
                } else {
                    FormalPolyN::zero()
                };
                assert_eq!(c, expect, "m = {m}, j = {j}");
            }
        }
    }

    #[test]
    fn window_monotone() {
        let mut p = MultiLaurent::zero_uniform(2, -4, 4);
        p.add_term(vec![1, -2], FormalPolyN::constant(int(3)));
        p.add_term(vec![0, 1], FormalPolyN::monomial(int(-2), 1));
        p.add_term(vec![-3, 0], FormalPolyN::constant(ratio(1, 2)));
        let narrow = p.mul_exp_sum(vec![(1, 2), (0, 1)]);
        let wide = p.mul_exp_sum(vec![(-1, 4), (-2, 3)]);
        for (e, c) in narrow.terms() {
            assert_eq!(&wide.coeff(e).unwrap(), c);
        }
        assert_eq!(
            narrow.coeff(&[2, 1]).unwrap(),
            wide.coeff(&[2, 1]).unwrap()
        );
    }

    #[test]
    fn formal_poly_arithmetic() {
        let a = FormalPolyN::from_coeffs(vec![int(1), int(2)]);
        let b = FormalPolyN::from_coeffs(vec![int(-1), int(0), ratio(1, 3)]);
        let prod = &a * &b;
        assert_eq!(prod.coeffs(), &[int(-1), int(-2), ratio(1, 3), ratio(2, 3)]);
        assert!((&a - &a).is_zero());
        assert_eq!(prod.eval(&int(2)), a.eval(&int(2)) * b.eval(&int(2)));
    }
}
