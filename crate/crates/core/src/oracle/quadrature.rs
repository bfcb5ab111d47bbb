//! Exact Haar averages for 2N <= 4 from the Weyl eigenangle densities.
//!
//! With `x = cos(theta)` the densities become polynomial weights against the
//! Chebyshev measures:
//! - SO(2N): `prod_{i<j} (x_i - x_j)^2 dx / sqrt(1 - x^2)` (first kind),
//! - Sp(2N): `prod_{i<j} (x_i - x_j)^2 sqrt(1 - x^2) dx` (second kind),
//! - O^-(2N): eigenvalues `+1, -1` plus `N - 1` angles distributed as in Sp(2N - 2).
//!
//! The integrand is a polynomial of degree at most `k + 2(N - 1)` in each `x_i`,
//! so Gauss-Chebyshev rules with enough nodes are exact up to rounding.

use std::f64::consts::PI;

use crate::coefficients::Ensemble;
use crate::error::{Error, Result};
use crate::rmt::{char_derivs_power_basis, HaarSample, MomentSpec};

/// Nodes `x` and weights of an `m`-point Gauss-Chebyshev rule.
fn chebyshev_rule(m: usize, second_kind: bool) -> Vec<(f64, f64)> {
    (1..=m)
        .map(|i| {
            if second_kind {
                let t = i as f64 * PI / (m + 1) as f64;
                (t.cos(), PI / (m + 1) as f64 * t.sin().powi(2))
            } else {
                let t = (2 * i - 1) as f64 * PI / (2 * m) as f64;
                (t.cos(), PI / m as f64)
            }
        })
        .collect()
}

/// Haar average of `(Lambda^{(n1)}(1))^{k1} (Lambda^{(n2)}(1))^{k2}` over the
/// ensemble of `2N x 2N` matrices, for `N <= 2`.
pub fn weyl_quadrature_moment(n: usize, spec: &MomentSpec) -> Result<f64> {
    if n > 2 {
        return Err(Error::OracleUnsupported(n));
    }
    if n == 0 {
        return Err(Error::InvalidMc("N must be at least 1".into()));
    }
    let (vars, second_kind, fixed) = match spec.ensemble {
        Ensemble::So => (n, false, vec![]),
        Ensemble::Sp => (n, true, vec![]),
        Ensemble::Ominus => (n - 1, true, vec![1.0, -1.0]),
    };
    let k = (spec.k1 + spec.k2) as usize;
    let rule = chebyshev_rule(n + k + 4, second_kind);
    let order = spec.max_order();

    let mut num = 0.0;
    let mut den = 0.0;
    let mut point = vec![0usize; vars];
    loop {
        let xs: Vec<f64> = point.iter().map(|&i| rule[i].0).collect();
        let mut weight: f64 = point.iter().map(|&i| rule[i].1).product();
        for i in 0..vars {
            for j in i + 1..vars {
                weight *= (xs[i] - xs[j]).powi(2);
            }
        }
        let sample = HaarSample {
            angles: xs.iter().map(|x| x.acos()).collect(),
            fixed_eigs: fixed.clone(),
        };
        num += weight * spec.eval(&char_derivs_power_basis(&sample, order));
        den += weight;
        // odometer over the tensor grid
        let mut p = 0;
        loop {
            if p == vars {
                return Ok(num / den);
            }
            point[p] += 1;
            if point[p] < rule.len() {
                break;
            }
            point[p] = 0;
            p += 1;
        }
    }
}
