//! Haar sampling of Sp(2N), SO(2N) and O^-(2N) and Monte Carlo estimation of
//! joint moments of derivatives of characteristic polynomials at 1.

mod estimate;
pub mod linalg;
mod metropolis;
pub mod quaternion;
mod sample;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoeffQuery, Ensemble};
use crate::error::{Error, Result};

pub use estimate::{
    asymptotic_report, estimate_moment, estimate_moments, AsymptoticReport, McConfig,
    MomentEstimate, Sampler,
};
pub use metropolis::sample_weyl_metropolis;
pub use sample::{
    haar_orthogonal, haar_symplectic, quaternion_to_complex, sample, sample_from_stream,
    EigenBackend, OrthogonalDraw, SampleFailure, PAIR_TOL,
};

/// Eigenangles of one sampled matrix: one representative `theta in [0, pi]` per
/// conjugate pair, plus the eigenvalues fixed at `+1` or `-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarSample {
    pub angles: Vec<f64>,
    pub fixed_eigs: Vec<f64>,
}

impl HaarSample {
    /// Matrix dimension `2 * pairs + fixed`.
    pub fn dim(&self) -> usize {
        2 * self.angles.len() + self.fixed_eigs.len()
    }

    /// Product of all eigenvalues.
    pub fn det(&self) -> f64 {
        self.fixed_eigs.iter().product()
    }

    /// Coefficients `c_0..c_{2N}` of `Lambda(s) = prod (1 - 2 cos(theta) s + s^2) prod (1 - eps s)`.
    pub fn char_poly(&self) -> Vec<f64> {
        let mut c = vec![1.0];
        for &t in &self.angles {
            c = convolve(&c, &[1.0, -2.0 * t.cos(), 1.0]);
        }
        for &e in &self.fixed_eigs {
            c = convolve(&c, &[1.0, -e]);
        }
        c
    }

    /// Coefficients of `Lambda(1 + t)` in `t`. Each pair contributes
    /// `a + a t + t^2` with `a = 2 - 2 cos(theta) = 4 sin^2(theta / 2)`, each fixed
    /// eigenvalue `(1 - eps) - eps t`, so `Lambda(1) = 0` exactly whenever `+1` is fixed.
    pub fn shifted_char_poly(&self) -> Vec<f64> {
        let mut c = vec![1.0];
        for &t in &self.angles {
            let s = (0.5 * t).sin();
            let a = 4.0 * s * s;
            c = convolve(&c, &[a, a, 1.0]);
        }
        for &e in &self.fixed_eigs {
            c = convolve(&c, &[1.0 - e, -e]);
        }
        c
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn falling_factorial(j: usize, n: usize) -> f64 {
    (j + 1 - n..=j).map(|v| v as f64).product()
}

/// `Lambda^{(n)}(1)` for `n = 0..=max_order`, read off `Lambda(1 + t)`:
/// `n! [t^n]`. Orders beyond `2N` are exactly 0.
pub fn char_derivs_at_one(s: &HaarSample, max_order: usize) -> Vec<f64> {
    let c = s.shifted_char_poly();
    let mut fact = 1.0;
    (0..=max_order)
        .map(|n| {
            if n > 0 {
                fact *= n as f64;
            }
            c.get(n).map_or(0.0, |v| v * fact)
        })
        .collect()
}

/// Same derivatives from the power basis: `sum_j c_j j! / (j - n)!`.
pub fn char_derivs_power_basis(s: &HaarSample, max_order: usize) -> Vec<f64> {
    let c = s.char_poly();
    (0..=max_order)
        .map(|n| c.iter().enumerate().skip(n).map(|(j, cj)| cj * falling_factorial(j, n)).sum())
        .collect()
}

/// The statistic `(Lambda^{(n1)}(1))^{k1} (Lambda^{(n2)}(1))^{k2}` over one ensemble.
///
/// Looser than [`CoeffQuery`]: any orders and powers are allowed, so degenerate
/// cases (`k1 = k2 = 0`, O^- with `n = 0`) can be simulated too.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MomentSpec {
    pub ensemble: Ensemble,
    pub k1: u32,
    pub k2: u32,
    pub n1: u32,
    pub n2: u32,
}

impl MomentSpec {
    pub fn new(ensemble: Ensemble, k1: u32, k2: u32, n1: u32, n2: u32) -> Self {
        Self { ensemble, k1, k2, n1, n2 }
    }

    pub fn query(&self) -> Result<CoeffQuery> {
        CoeffQuery::new(self.ensemble, self.k1, self.k2, self.n1, self.n2)
    }

    pub fn max_order(&self) -> usize {
        let mut m = 0;
        if self.k1 > 0 {
            m = self.n1;
        }
        if self.k2 > 0 {
            m = m.max(self.n2);
        }
        m as usize
    }

    /// Evaluate on a derivative table from [`char_derivs_at_one`].
    pub fn eval(&self, derivs: &[f64]) -> f64 {
        let d = |n: u32| derivs.get(n as usize).copied().unwrap_or(0.0);
        d(self.n1).powi(self.k1 as i32) * d(self.n2).powi(self.k2 as i32)
    }

    /// Power of `2N` in the leading-order growth; agrees with
    /// [`crate::scaling_exponent`] on valid queries, and may be negative otherwise.
    pub fn exponent(&self) -> i64 {
        let (k1, k2, n1, n2) = (self.k1 as i64, self.k2 as i64, self.n1 as i64, self.n2 as i64);
        let k = k1 + k2;
        match self.ensemble {
            Ensemble::Sp => k * (k + 1) / 2 + k1 * n1 + k2 * n2,
            Ensemble::So => k * (k - 1) / 2 + k1 * n1 + k2 * n2,
            Ensemble::Ominus => k * (k + 1) / 2 + k1 * (n1 - 1) + k2 * (n2 - 1),
        }
    }
}

impl From<CoeffQuery> for MomentSpec {
    fn from(q: CoeffQuery) -> Self {
        Self::new(q.ensemble, q.k1, q.k2, q.n1, q.n2)
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidMc("N must be at least 1".into()));
    }
    Ok(())
}
