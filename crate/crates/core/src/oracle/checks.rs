use std::fmt::Display;

use num_traits::{pow, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::laurent::{contour_extract, FormalPolyN, MultiLaurent};
use super::signed_permutations;
use crate::coefficients::det_block_sum;
use crate::enumeration::{enum_deriv_tuples, enum_weak_compositions};
use crate::exact::{binomial, factorial, int, inv_factorial, ratio, Rational, TruncatedSeries};

/// Result of one identity check at one parameter point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub identity: String,
    pub params: String,
    pub pass: bool,
    /// Both sides, when they differ.
    pub witness: Option<String>,
}

impl CheckOutcome {
    fn compare<T: PartialEq + Display>(identity: &str, params: String, lhs: &T, rhs: &T) -> Self {
        let pass = lhs == rhs;
        let witness = (!pass).then(|| format!("lhs = {lhs}; rhs = {rhs}"));
        Self { identity: identity.to_string(), params, pass, witness }
    }
}

/// `prod_{i<j} (w_i - w_j)(w_i^2 - w_j^2)`.
fn vandermonde_pair(k: usize, window: &[(i32, i32)]) -> MultiLaurent {
    let mut out = MultiLaurent::one(window.to_vec());
    for i in 0..k {
        for j in i + 1..k {
            let mut f = MultiLaurent::zero(window.to_vec());
            for (ei, ej, c) in [(3, 0, 1), (2, 1, -1), (1, 2, -1), (0, 3, 1)] {
                let mut e = vec![0; k];
                e[i] = ei;
                e[j] = ej;
                f.add_term(e, FormalPolyN::constant(int(c)));
            }
            out = out.mul(&f);
        }
    }
    out
}

/// `sum_i w_i^{-power}`.
fn inverse_power_sum(k: usize, power: i32, window: &[(i32, i32)]) -> MultiLaurent {
    let mut out = MultiLaurent::zero(window.to_vec());
    for i in 0..k {
        let mut e = vec![0; k];
        e[i] = -power;
        out.add_term(e, FormalPolyN::constant(int(1)));
    }
    out
}

fn parity_sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Contour integral of `Delta(w) Delta(w^2) e^{N sum w} prod_j (sum_i w_i^{-2j})^{m_j}`
/// against `prod dw_i / w_i^{2k}` (or `w_i^{2k-1}` when `odd_divisor`), compared with
/// its closed form as a block sum of `g` determinants. `m[0]` is `m_1`.
pub fn check_integral_prop1(k: usize, m: &[u32], odd_divisor: bool) -> CheckOutcome {
    assert!(k >= 1);
    let weight: i32 = m.iter().enumerate().map(|(j, &mj)| (j as i32 + 1) * mj as i32).sum();
    let kk = k as i32;
    // every partial product stays inside this box, so nothing is truncated
    let window = vec![(-2 * weight, 3 * (kk - 1)); k];
    let mut integrand = vandermonde_pair(k, &window);
    for (j, &mj) in m.iter().enumerate() {
        if mj > 0 {
            let p = inverse_power_sum(k, 2 * (j as i32 + 1), &window).pow(mj);
            integrand = integrand.mul(&p);
        }
    }
    let d = if odd_divisor { 2 * kk - 1 } else { 2 * kk };
    let integrand = integrand.mul_exp_sum(vec![(d - 1, d - 1); k]);
    let lhs = contour_extract(&integrand, &vec![d; k]).expect("target lies in window");

    let triangle = k * (k - 1) / 2;
    let (shift, base) = if odd_divisor { (-1, triangle) } else { (0, triangle + k) };
    let c = parity_sign(triangle % 2 == 1)
        * Rational::from_integer(factorial(k as u64))
        * det_block_sum(k, m, shift);
    let rhs = FormalPolyN::monomial(c, base + 2 * weight as usize);
    let identity = if odd_divisor { "integral_odd_divisor" } else { "integral_even_divisor" };
    CheckOutcome::compare(identity, format!("k={k} m={m:?}"), &lhs, &rhs)
}

/// Contour integral of `Delta(w) Delta(w^2) e^{N sum w} / prod_j w_j^{2k+m_j}` against
/// the permutation sum of determinants of `N^a / Gamma(a+1)`, `a = 2k+m_mu(i)-2i-j+2`.
pub fn check_integral_prop2(k: usize, m: &[i32]) -> CheckOutcome {
    assert_eq!(m.len(), k);
    let kk = k as i32;
    let window = vec![(0, 3 * (kk - 1)); k];
    let divisors: Vec<i32> = m.iter().map(|mj| 2 * kk + mj).collect();
    let targets = divisors.iter().map(|d| (d - 1, d - 1)).collect();
    let integrand = vandermonde_pair(k, &window).mul_exp_sum(targets);
    let lhs = contour_extract(&integrand, &divisors).expect("target lies in window");

    let entry = |row: usize, col: usize, mu: &[usize]| -> FormalPolyN {
        let a = 2 * kk + m[mu[row]] - 2 * (row as i32 + 1) - (col as i32 + 1) + 2;
        if a < 0 {
            FormalPolyN::zero()
        } else {
            FormalPolyN::monomial(inv_factorial(a as u64), a as usize)
        }
    };
    let perms = signed_permutations(k);
    let mut rhs = FormalPolyN::zero();
    for (mu, _) in &perms {
        for (sigma, odd) in &perms {
            let mut term = FormalPolyN::constant(parity_sign(*odd));
            for (row, &col) in sigma.iter().enumerate() {
                term = &term * &entry(row, col, mu);
            }
            rhs = &rhs + &term;
        }
    }
    CheckOutcome::compare("integral_permutation_sum", format!("k={k} m={m:?}"), &lhs, &rhs)
}

/// Permutation-expansion determinant of `1/Gamma(2k+m_i-2i-j+2)` against the
/// product formula.
pub fn check_gamma_det(k: usize, m: &[u32]) -> CheckOutcome {
    assert_eq!(m.len(), k);
    let kk = k as i64;
    let entry = |i: usize, j: usize| -> Rational {
        // 1/Gamma(z) vanishes at z <= 0
        let z = 2 * kk + m[i] as i64 - 2 * (i as i64 + 1) - (j as i64 + 1) + 2;
        if z <= 0 {
            Rational::zero()
        } else {
            inv_factorial(z as u64 - 1)
        }
    };
    let mut lhs = Rational::zero();
    for (sigma, odd) in signed_permutations(k) {
        let mut term = parity_sign(odd);
        for (i, &j) in sigma.iter().enumerate() {
            term *= entry(i, j);
            if term.is_zero() {
                break;
            }
        }
        lhs += term;
    }
    let mut rhs = Rational::one();
    for j in 1..=kk {
        rhs *= inv_factorial((2 * kk + m[j as usize - 1] as i64 - 2 * j) as u64);
    }
    for i in 1..=kk {
        for j in i + 1..=kk {
            let (mi, mj) = (m[i as usize - 1] as i64, m[j as usize - 1] as i64);
            rhs *= int(mj - mi - 2 * j + 2 * i);
        }
    }
    CheckOutcome::compare("gamma_determinant", format!("k={k} m={m:?}"), &lhs, &rhs)
}

fn draw_rational(rng: &mut ChaCha8Rng, span: i64, max_den: i64) -> Rational {
    loop {
        let n = rng.gen_range(-span..=span);
        if n != 0 {
            return ratio(n, rng.gen_range(1..=max_den));
        }
    }
}

/// n-th `alpha`-derivative at 0 of `e^{-N alpha} / prod_i (w_i^2 - alpha^2)`, computed
/// from the truncated series, from the even-composition form and from the
/// partition form, at `trials` random rational points. Passes iff all three agree
/// exactly everywhere.
pub fn check_derivative_lemmas(n: u32, k: usize, trials: usize, seed: u64) -> CheckOutcome {
    assert!(k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 32) | n as u64);
    let params = format!("n={n} k={k} trials={trials} seed={seed}");
    for trial in 0..trials {
        let big_n = draw_rational(&mut rng, 9, 7);
        let mut w: Vec<Rational> = Vec::with_capacity(k);
        while w.len() < k {
            let x = draw_rational(&mut rng, 12, 6);
            let mag = num_traits::abs(x.clone());
            if w.iter().all(|y| num_traits::abs(y.clone()) != mag) {
                w.push(x);
            }
        }
        let values = [
            derivative_direct(n, &big_n, &w),
            derivative_compositions(n, &big_n, &w),
            derivative_partitions(n, &big_n, &w),
        ];
        if values[0] != values[1] || values[0] != values[2] {
            let w: Vec<String> = w.iter().map(ToString::to_string).collect();
            return CheckOutcome {
                identity: "derivative_forms".into(),
                params,
                pass: false,
                witness: Some(format!(
                    "trial {trial}: N={big_n} w=[{}] series={} compositions={} partitions={}",
                    w.join(", "),
                    values[0],
                    values[1],
                    values[2]
                )),
            };
        }
    }
    CheckOutcome { identity: "derivative_forms".into(), params, pass: true, witness: None }
}

fn derivative_direct(n: u32, big_n: &Rational, w: &[Rational]) -> Rational {
    let deg = n as usize;
    let exp_coeffs = (0..=deg)
        .map(|j| pow(-big_n.clone(), j) * inv_factorial(j as u64))
        .collect();
    let mut s = TruncatedSeries::from_coeffs(exp_coeffs, deg);
    for wi in w {
        let w2 = wi * wi;
        // 1/(w^2 - a^2) = sum_j a^{2j} / w^{2j+2}
        let geom = (0..=deg)
            .map(|j| {
                if j % 2 == 0 {
                    pow(w2.clone(), j / 2 + 1).recip()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        s = &s * &TruncatedSeries::from_coeffs(geom, deg);
    }
    s.derivative_at_zero(deg)
}

fn inv_square_product(w: &[Rational]) -> Rational {
    w.iter().map(|x| (x * x).recip()).product()
}

fn derivative_compositions(n: u32, big_n: &Rational, w: &[Rational]) -> Rational {
    let mut total = Rational::zero();
    for m in (0..=n).step_by(2) {
        let mut inner = Rational::zero();
        for half in enum_weak_compositions(m / 2, w.len()) {
            inner += w
                .iter()
                .zip(&half)
                .map(|(x, &h)| pow(x.clone(), 2 * h as usize).recip())
                .product::<Rational>();
        }
        total += Rational::from_integer(binomial(n as u64, m as u64) * factorial(m as u64))
            * pow(-big_n.clone(), (n - m) as usize)
            * inner;
    }
    total * inv_square_product(w)
}

fn derivative_partitions(n: u32, big_n: &Rational, w: &[Rational]) -> Rational {
    let sums: Vec<Rational> = (1..=n as usize / 2)
        .map(|j| {
            w.iter().map(|x| pow(x.clone(), 2 * j).recip()).sum::<Rational>() / int(j as i64)
        })
        .collect();
    let mut total = Rational::zero();
    for t in enum_deriv_tuples(n) {
        let mut denom = factorial(t.a0 as u64);
        let mut term = pow(-big_n.clone(), t.a0 as usize);
        for (s, &a) in sums.iter().zip(&t.higher) {
            denom *= factorial(a as u64);
            term *= pow(s.clone(), a as usize);
        }
        total += term * Rational::new(factorial(n as u64), denom);
    }
    total * inv_square_product(w)
}

/// All tuples `(m_1..m_len)` with `1 <= len <= max_len` and `sum_j j m_j <= max_weight`.
fn weighted_tuples(max_len: usize, max_weight: u32) -> Vec<Vec<u32>> {
    fn fill(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        let step = pos as u32 + 1;
        for v in 0..=left / step {
            cur[pos] = v;
            fill(pos + 1, left - v * step, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    for len in 1..=max_len {
        fill(0, max_weight, &mut vec![0; len], &mut out);
    }
    out
}

fn integer_box(k: usize, lo: i32, hi: i32) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i32>| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Both even and odd divisor integrals for `k <= max_k` and every `m` tuple of
/// length at most 3 with `sum_j j m_j <= max_weight`.
pub fn prop1_suite(max_k: usize, max_weight: u32) -> Vec<CheckOutcome> {
    let points: Vec<(usize, Vec<u32>, bool)> = (1..=max_k)
        .flat_map(|k| {
            weighted_tuples(3, max_weight)
                .into_iter()
                .flat_map(move |m| [(k, m.clone(), false), (k, m, true)])
        })
        .collect();
    points.par_iter().map(|(k, m, odd)| check_integral_prop1(*k, m, *odd)).collect()
}

/// Permutation-sum integrals for `k <= max_k`, `m in [-bound, bound]^k`.
pub fn prop2_suite(max_k: usize, bound: i32) -> Vec<CheckOutcome> {
    let points: Vec<Vec<i32>> = (1..=max_k).flat_map(|k| integer_box(k, -bound, bound)).collect();
    points.par_iter().map(|m| check_integral_prop2(m.len(), m)).collect()
}

/// One outcome per `(k, n)` with `k <= max_k`, `n <= max_n`.
pub fn lemma_suite(max_n: u32, max_k: usize, trials: usize, seed: u64) -> Vec<CheckOutcome> {
    let points: Vec<(usize, u32)> =
        (1..=max_k).flat_map(|k| (0..=max_n).map(move |n| (k, n))).collect();
    points.par_iter().map(|&(k, n)| check_derivative_lemmas(n, k, trials, seed)).collect()
}

/// Gamma determinants for `k <= max_k`, `m in [0, max_m]^k`.
pub fn gamma_suite(max_k: usize, max_m: u32) -> Vec<CheckOutcome> {
    let points: Vec<Vec<u32>> = (1..=max_k)
        .flat_map(|k| integer_box(k, 0, max_m as i32))
        .map(|m| m.into_iter().map(|v| v as u32).collect())
        .collect();
    points.par_iter().map(|m| check_gamma_det(m.len(), m)).collect()
}
