//! Leading-order coefficients `b^G_{k1,k2}(n1, n2)` of the joint moments
//! `E[(Λ^(n1)(1))^k1 (Λ^(n2)(1))^k2] ~ b (2N)^e` over Sp(2N), SO(2N), O^-(2N).
//!
//! Two independent routes are provided for Sp and SO:
//! - [`b_det`]: sums over derivative-tuple compositions of `u`-derivatives of
//!   determinants of `g_m(u)`;
//! - [`b_comb`]: sums over row-bounded integer matrices of factorial weights
//!   times a Vandermonde-type product.
//!
//! O^- reduces to Sp at shifted orders ([`b_ominus`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::{enum_bounded_matrices, enum_deriv_tuples, enum_weak_compositions, DerivTuple};
use crate::error::{Error, Result};
use crate::exact::{factorial, g_series, int, inv_factorial, multinomial, pow2, series_det, sign, Rational, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Sp,
    So,
    Ominus,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Sp => "sp",
            Ensemble::So => "so",
            Ensemble::Ominus => "ominus",
        })
    }
}

impl FromStr for Ensemble {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sp" => Ok(Ensemble::Sp),
            "so" => Ok(Ensemble::So),
            "ominus" | "o-" | "o_minus" => Ok(Ensemble::Ominus),
            other => Err(format!("unknown ensemble `{other}` (expected sp, so or ominus)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Det,
    Comb,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Det => "det",
            Backend::Comb => "comb",
        })
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "det" => Ok(Backend::Det),
            "comb" => Ok(Backend::Comb),
            other => Err(format!("unknown backend `{other}` (expected det or comb)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaTag {
    Det,
    Comb,
    OminusReduction,
    ClosedForm,
}

/// One leading-order coefficient: ensemble, powers `k1, k2`, derivative orders `n1 <= n2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoeffQuery {
    pub ensemble: Ensemble,
    pub k1: u32,
    pub k2: u32,
    pub n1: u32,
    pub n2: u32,
}

impl CoeffQuery {
    pub fn new(ensemble: Ensemble, k1: u32, k2: u32, n1: u32, n2: u32) -> Result<Self> {
        let q = Self { ensemble, k1, k2, n1, n2 };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 > self.n2 {
            return Err(Error::InvalidQuery(format!(
                "n1 <= n2 violated (n1 = {}, n2 = {})",
                self.n1, self.n2
            )));
        }
        if self.k1 == 0 && self.k2 == 0 {
            return Err(Error::InvalidQuery("k1 and k2 must not both be 0".into()));
        }
        if self.ensemble == Ensemble::Ominus && self.n1 == 0 {
            return Err(Error::InvalidQuery("ominus requires n1 >= 1".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> u32 {
        self.k1 + self.k2
    }

    pub fn with_ensemble(self, ensemble: Ensemble) -> Self {
        Self { ensemble, ..self }
    }
}

impl fmt::Display for CoeffQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b^{}_{{{},{}}}({},{})", self.ensemble, self.k1, self.k2, self.n1, self.n2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffResult {
    pub value: Rational,
    /// Power of `2N` in the leading term.
    pub exponent: u64,
    pub formula: FormulaTag,
    /// Which of the two Sp/SO formulae produced the value, where one was used.
    pub backend: Option<Backend>,
}

fn triangular(k: u64) -> u64 {
    k * (k + 1) / 2
}

/// Power of `2N` multiplying `b` in the leading-order asymptotic.
pub fn scaling_exponent(q: &CoeffQuery) -> Result<u64> {
    q.validate()?;
    let k = q.k() as u64;
    let (k1, k2, n1, n2) = (q.k1 as u64, q.k2 as u64, q.n1 as u64, q.n2 as u64);
    Ok(match q.ensemble {
        Ensemble::Sp => triangular(k) + k1 * n1 + k2 * n2,
        Ensemble::So => k * k.saturating_sub(1) / 2 + k1 * n1 + k2 * n2,
        Ensemble::Ominus => triangular(k) + k1 * (n1 - 1) + k2 * n2.saturating_sub(1),
    })
}

/// Compute `b(q)` with the requested backend (O^- uses it for the Sp factor).
pub fn coefficient(q: &CoeffQuery, backend: Backend) -> Result<CoeffResult> {
    match (q.ensemble, backend) {
        (Ensemble::Ominus, _) => b_ominus(q, backend),
        (_, Backend::Det) => b_det(q),
        (_, Backend::Comb) => b_comb(q),
    }
}

fn require_sp_or_so(q: &CoeffQuery) -> Result<()> {
    q.validate()?;
    if q.ensemble == Ensemble::Ominus {
        return Err(Error::InvalidQuery(
            "this formula applies to sp and so; use b_ominus for ominus".into(),
        ));
    }
    Ok(())
}

/// Weight `k!/prod u_i! * (n!)^k / prod_i (tuple_i!)^{u_i} / prod_j j^{sum_i u_i t_ij}`
/// of one composition `u` of `k` over the derivative tuples of order `n`, where
/// `tuple! = a_0! a_1! ... a_{n/2}!`.
fn composition_weight(k: u32, n: u32, tuples: &[DerivTuple], u: &[u32]) -> Rational {
    let parts: Vec<u64> = u.iter().map(|&x| x as u64).collect();
    let mut num = multinomial(k as u64, &parts).expect("composition sums to k");
    num *= num_traits::pow(factorial(n as u64), k as usize);
    let mut den = BigInt::one();
    for (t, &ui) in tuples.iter().zip(u) {
        if ui == 0 {
            continue;
        }
        let mut tf = factorial(t.a0 as u64);
        for (j, &a) in t.higher.iter().enumerate() {
            tf *= factorial(a as u64);
            tf *= num_traits::pow(BigInt::from(j + 1), a as usize);
        }
        den *= num_traits::pow(tf, ui as usize);
    }
    Rational::new(num, den)
}

/// `sum over splittings (m_{s,1..k}) of m_s, s = 2..len(m), of
/// prod_s multinomial(m_s; m_{s,.}) * (d/du)^{m_1} det(g_{2i-j+shift+2 sum_s s m_{s,i}}(u))|_{u=0}`.
///
/// `m[0]` is `m_1`, the order of the `u`-derivative. `shift` is 0 for the
/// symplectic determinant and -1 for the orthogonal one.
pub fn det_block_sum(k: usize, m: &[u32], shift: i64) -> Rational {
    assert!(k >= 1);
    let m1 = m.first().copied().unwrap_or(0) as usize;
    let mut g_cache: HashMap<i64, TruncatedSeries> = HashMap::new();
    let mut total = Rational::zero();
    let mut offsets = vec![0i64; k];
    split_rec(k, m, 1, BigInt::one(), &mut offsets, &mut |weight, offsets| {
        let matrix: Vec<Vec<TruncatedSeries>> = (1..=k as i64)
            .map(|i| {
                (1..=k as i64)
                    .map(|j| {
                        let idx = 2 * i - j + shift + offsets[i as usize - 1];
                        g_cache.entry(idx).or_insert_with(|| g_series(idx, m1)).clone()
                    })
                    .collect()
            })
            .collect();
        let det = series_det(&matrix).expect("square matrix of uniform degree");
        total += det.derivative_at_zero(m1) * Rational::from_integer(weight.clone());
    });
    total
}

fn split_rec(
    k: usize,
    m: &[u32],
    s_index: usize,
    weight: BigInt,
    offsets: &mut Vec<i64>,
    visit: &mut dyn FnMut(&BigInt, &[i64]),
) {
    if s_index >= m.len() {
        visit(&weight, offsets);
        return;
    }
    let s = (s_index + 1) as i64;
    let ms = m[s_index];
    for split in enum_weak_compositions(ms, k) {
        let parts: Vec<u64> = split.iter().map(|&x| x as u64).collect();
        let w = &weight * multinomial(ms as u64, &parts).expect("split sums to m_s");
        for (o, &p) in offsets.iter_mut().zip(&split) {
            *o += 2 * s * p as i64;
        }
        split_rec(k, m, s_index + 1, w, offsets, visit);
        for (o, &p) in offsets.iter_mut().zip(&split) {
            *o -= 2 * s * p as i64;
        }
    }
}

/// Determinant formula for Sp or SO.
pub fn b_det(q: &CoeffQuery) -> Result<CoeffResult> {
    require_sp_or_so(q)?;
    let exponent = scaling_exponent(q)?;
    let (k1, k2, n1, n2) = (q.k1, q.k2, q.n1, q.n2);
    let k = q.k() as usize;
    let len = (n2 / 2) as usize;
    let len1 = (n1 / 2) as usize;
    let a_tuples = enum_deriv_tuples(n1);
    let b_tuples = enum_deriv_tuples(n2);
    let shift = match q.ensemble {
        Ensemble::Sp => 0,
        _ => -1,
    };

    let mut inner_cache: HashMap<Vec<u32>, Rational> = HashMap::new();
    let mut total = Rational::zero();
    // k1 = 0 (resp. k2 = 0) leaves the single empty composition with weight 1
    let comps_a: Vec<Vec<u32>> = enum_weak_compositions(k1, a_tuples.len()).collect();
    let comps_b: Vec<Vec<u32>> = enum_weak_compositions(k2, b_tuples.len()).collect();
    for u in &comps_a {
        let wa = composition_weight(k1, n1, &a_tuples, u);
        let mut m_a = vec![0u32; len];
        for (t, &ui) in a_tuples.iter().zip(u) {
            for (j, &a) in t.higher.iter().enumerate().take(len1) {
                m_a[j] += ui * a;
            }
        }
        for v in &comps_b {
            let wb = composition_weight(k2, n2, &b_tuples, v);
            let mut m = m_a.clone();
            for (t, &vi) in b_tuples.iter().zip(v) {
                for (j, &b) in t.higher.iter().enumerate() {
                    m[j] += vi * b;
                }
            }
            let inner = inner_cache
                .entry(m.clone())
                .or_insert_with(|| det_block_sum(k, &m, shift))
                .clone();
            if !inner.is_zero() {
                total += &wa * &wb * inner;
            }
        }
    }

    let kk = q.k() as i64;
    let degree_sum = (k1 * n1 + k2 * n2) as i64;
    let prefactor = match q.ensemble {
        Ensemble::Sp => sign(degree_sum % 2 == 1) * pow2(-(kk * (kk + 1) / 2 + degree_sum)),
        _ => pow2(-(kk * (kk - 3) / 2 + degree_sum)),
    };
    Ok(CoeffResult {
        value: prefactor * total,
        exponent,
        formula: FormulaTag::Det,
        backend: Some(Backend::Det),
    })
}

const CHUNK: u128 = 2048;

/// Sum over one bounded-matrix family of `prod_i n!/(n - 2 rowsum_i)!`, grouped
/// by the doubled column sums.
fn aggregate_family(rows: usize, cols: usize, n: u32) -> BTreeMap<Vec<u32>, BigInt> {
    let family = enum_bounded_matrices(rows, cols, n);
    let total = family.total();
    let row_weights: Vec<BigInt> = family
        .row_set()
        .iter()
        .map(|r| {
            let s: u32 = r.iter().sum();
            factorial(n as u64) / factorial((n - 2 * s) as u64)
        })
        .collect();
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut it = family.clone().starting_at(c * CHUNK);
            let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
            let mut left = CHUNK.min(total - c * CHUNK);
            while left > 0 {
                let Some(idx) = it.next_indices() else { break };
                left -= 1;
                let mut v = vec![0u32; cols];
                let mut w = BigInt::one();
                for &d in idx {
                    for (vj, e) in v.iter_mut().zip(&family.row_set()[d]) {
                        *vj += 2 * e;
                    }
                    w *= &row_weights[d];
                }
                *map.entry(v).or_insert_with(BigInt::zero) += w;
            }
            map
        })
        .reduce(BTreeMap::new, merge_maps)
}

fn merge_maps(
    mut a: BTreeMap<Vec<u32>, BigInt>,
    b: BTreeMap<Vec<u32>, BigInt>,
) -> BTreeMap<Vec<u32>, BigInt> {
    for (k, v) in b {
        *a.entry(k).or_insert_with(BigInt::zero) += v;
    }
    a
}

/// Combinatorial formula for Sp or SO.
pub fn b_comb(q: &CoeffQuery) -> Result<CoeffResult> {
    require_sp_or_so(q)?;
    let exponent = scaling_exponent(q)?;
    let k = q.k() as usize;
    let kk = k as i64;
    let fact_shift: i64 = match q.ensemble {
        Ensemble::Sp => 1,
        _ => 0,
    };

    let first = aggregate_family(q.k1 as usize, k, q.n1);
    let second = aggregate_family(q.k2 as usize, k, q.n2);

    let mut combined: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
    for (v1, w1) in &first {
        for (v2, w2) in &second {
            let v: Vec<u32> = v1.iter().zip(v2).map(|(a, b)| a + b).collect();
            *combined.entry(v).or_insert_with(BigInt::zero) += w1 * w2;
        }
    }

    let mut total = Rational::zero();
    for (v, w) in &combined {
        let mut vandermonde = BigInt::one();
        for i in 0..k {
            for j in i + 1..k {
                // 1-based: V_j - V_i - 2j + 2i
                let f = v[j] as i64 - v[i] as i64 - 2 * (j as i64 - i as i64);
                vandermonde *= f;
            }
        }
        if vandermonde.is_zero() {
            continue;
        }
        let mut term = Rational::from_integer(w * vandermonde);
        for (j, &vj) in v.iter().enumerate() {
            let arg = 2 * kk + vj as i64 - 2 * (j as i64 + 1) + fact_shift;
            term *= inv_factorial(arg as u64);
        }
        total += term;
    }

    let degree_sum = (q.k1 * q.n1 + q.k2 * q.n2) as i64;
    let half = kk * (kk - 1) / 2;
    let prefactor = match q.ensemble {
        Ensemble::Sp => sign((half + degree_sum) % 2 == 1) * pow2(-(kk * (kk + 1) / 2 + degree_sum)),
        _ => sign(half % 2 == 1) * pow2(-(kk * (kk - 3) / 2 + degree_sum)),
    };
    Ok(CoeffResult {
        value: prefactor * total,
        exponent,
        formula: FormulaTag::Comb,
        backend: Some(Backend::Comb),
    })
}

/// O^- coefficient via `(-1)^{k1(n1-1)+k2(n2-1)} 2^k n1^k1 n2^k2 b^Sp(k1, k2, n1-1, n2-1)`.
pub fn b_ominus(q: &CoeffQuery, backend: Backend) -> Result<CoeffResult> {
    q.validate()?;
    if q.ensemble != Ensemble::Ominus {
        return Err(Error::InvalidQuery("b_ominus requires the ominus ensemble".into()));
    }
    let exponent = scaling_exponent(q)?;
    let sp = CoeffQuery::new(Ensemble::Sp, q.k1, q.k2, q.n1 - 1, q.n2 - 1)?;
    let base = coefficient(&sp, backend)?.value;
    let parity = (q.k1 * (q.n1 - 1) + q.k2 * (q.n2 - 1)) % 2 == 1;
    let scale = sign(parity)
        * pow2(q.k() as i64)
        * Rational::from_integer(num_traits::pow(BigInt::from(q.n1), q.k1 as usize))
        * Rational::from_integer(num_traits::pow(BigInt::from(q.n2), q.k2 as usize));
    Ok(CoeffResult {
        value: scale * base,
        exponent,
        formula: FormulaTag::OminusReduction,
        backend: Some(backend),
    })
}

/// `b_{0,1}(0, n)`: `(-1)^n / (2(n+1))` for Sp and `1` for SO.
pub fn first_moment_closed_form(ensemble: Ensemble, n: u32) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidQuery("closed form requires n >= 1".into()));
    }
    match ensemble {
        Ensemble::Sp => Ok(sign(n % 2 == 1) / int(2 * (n as i64 + 1))),
        Ensemble::So => Ok(Rational::one()),
        Ensemble::Ominus => Err(Error::InvalidQuery(
            "closed form is stated for sp and so only".into(),
        )),
    }
}
