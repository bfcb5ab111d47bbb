use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{factorial, Rational};
use crate::error::{Error, Result};

/// Polynomial in `u` with rational coefficients, truncated above degree `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![Rational::zero(); degree + 1] }
    }

    pub fn one(degree: usize) -> Self {
        Self::constant(Rational::one(), degree)
    }

    pub fn constant(c: Rational, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = c;
        s
    }

    /// Builds a series from coefficients, padding with zeros or truncating to `degree`.
    pub fn from_coeffs(mut coeffs: Vec<Rational>, degree: usize) -> Self {
        coeffs.resize(degree + 1, Rational::zero());
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `u^j`; zero beyond the truncation degree.
    pub fn coeff(&self, j: usize) -> Rational {
        self.coeffs.get(j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// `j`-th derivative at `u = 0`, i.e. `j! [u^j]`.
    pub fn derivative_at_zero(&self, j: usize) -> Rational {
        self.coeff(j) * Rational::from_integer(factorial(j as u64))
    }

    fn check_degree(&self, other: &Self) {
        assert_eq!(self.degree(), other.degree(), "truncation degree mismatch");
    }

    fn add_assign_ref(&mut self, other: &Self) {
        self.check_degree(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        self.check_degree(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.check_degree(rhs);
        let m = self.degree();
        let mut out = TruncatedSeries::zero(m);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=m - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        write!(f, "[{}] + O(u^{})", parts.join(", "), self.degree() + 1)
    }
}

/// Degree-`degree` truncation of `g_m(u) = sum_j u^j / (j! (m+2j)!)`, where terms
/// with `m + 2j < 0` vanish (`1/Gamma` at a non-positive integer).
pub fn g_series(m: i64, degree: usize) -> TruncatedSeries {
    let coeffs = (0..=degree)
        .map(|j| {
            let idx = m + 2 * j as i64;
            if idx < 0 {
                Rational::zero()
            } else {
                Rational::new(
                    One::one(),
                    factorial(j as u64) * factorial(idx as u64),
                )
            }
        })
        .collect();
    TruncatedSeries { coeffs }
}

/// Determinant of a square matrix over the truncated-series ring.
///
/// Expands row by row over the set of columns already used, so each minor is
/// computed once: `O(2^k k)` series products and no division.
pub fn series_det(entries: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    let k = entries.len();
    if k == 0 {
        return Err(Error::EmptyMatrix);
    }
    let degree = entries[0]
        .first()
        .map(TruncatedSeries::degree)
        .ok_or(Error::NonSquare { row: 0, len: 0, expected: k })?;
    for (row, r) in entries.iter().enumerate() {
        if r.len() != k {
            return Err(Error::NonSquare { row, len: r.len(), expected: k });
        }
        for s in r {
            if s.degree() != degree {
                return Err(Error::MixedDegree { found: s.degree(), expected: degree });
            }
        }
    }
    assert!(k < usize::BITS as usize, "matrix too large for subset expansion");

    // minors[mask]: signed sum over placements of the first popcount(mask) rows
    // into the columns in `mask`.
    let mut minors: Vec<Option<TruncatedSeries>> = vec![None; 1 << k];
    minors[0] = Some(TruncatedSeries::one(degree));
    for row in entries {
        let mut next: Vec<Option<TruncatedSeries>> = vec![None; 1 << k];
        for (mask, minor) in minors.iter().enumerate() {
            let Some(minor) = minor else { continue };
            if minor.is_zero() {
                continue;
            }
            for (col, entry) in row.iter().enumerate() {
                if mask & (1 << col) != 0 || entry.is_zero() {
                    continue;
                }
                let inversions = (mask >> (col + 1)).count_ones();
                let term = minor * entry;
                let slot = &mut next[mask | (1 << col)];
                match slot {
                    Some(acc) if inversions % 2 == 0 => acc.add_assign_ref(&term),
                    Some(acc) => acc.sub_assign_ref(&term),
                    None if inversions % 2 == 0 => *slot = Some(term),
                    None => *slot = Some(-&term),
                }
            }
        }
        minors = next;
    }
    Ok(minors
        .pop()
        .flatten()
        .unwrap_or_else(|| TruncatedSeries::zero(degree)))
}
