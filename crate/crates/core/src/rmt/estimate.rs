use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metropolis::sample_weyl_metropolis;
use super::sample::{sample_from_stream, EigenBackend};
use super::{char_derivs_at_one, check_dim, MomentSpec};
use crate::coefficients::{coefficient, Backend, Ensemble};
use crate::error::{Error, Result};
use crate::exact::to_f64;

/// Source of eigenangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Haar matrices via QR of Gaussian matrices.
    #[default]
    Haar,
    /// Metropolis chains on the eigenangle density (cross-check only).
    Metropolis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub count: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub eigen: EigenBackend,
    /// Sweeps per chain for [`Sampler::Metropolis`].
    pub sweeps: usize,
}

impl McConfig {
    pub const MIN_COUNT: usize = 1000;

    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed, sampler: Sampler::Haar, eigen: EigenBackend::Tridiagonal, sweeps: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub query: MomentSpec,
    #[serde(rename = "N")]
    pub n: usize,
    pub sample_count: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Power of `2N` divided out of every sample before accumulation.
    pub exponent: i64,
    pub normalized_mean: f64,
    pub normalized_stderr: f64,
    /// Draws thrown away by the eigen-solver or pairing checks.
    pub discarded: u64,
}

/// Sum with a fixed binary-tree shape, so the result depends only on the data.
fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

const CHUNK: usize = 1024;

/// Monte Carlo estimates of several statistics over one shared set of draws.
/// Draw `i` comes from stream `i` of the seed, so results do not depend on the
/// number of worker threads.
pub fn estimate_moments(n: usize, specs: &[MomentSpec], cfg: &McConfig) -> Result<Vec<MomentEstimate>> {
    check_dim(n)?;
    let Some(first) = specs.first() else {
        return Ok(Vec::new());
    };
    let ensemble = first.ensemble;
    if specs.iter().any(|s| s.ensemble != ensemble) {
        return Err(Error::InvalidMc("statistics in one batch must share an ensemble".into()));
    }
    if cfg.count < McConfig::MIN_COUNT {
        return Err(Error::InvalidMc(format!(
            "sample count {} is below the minimum {}",
            cfg.count,
            McConfig::MIN_COUNT
        )));
    }
    let max_order = specs.iter().map(MomentSpec::max_order).max().unwrap_or(0);
    let scales: Vec<f64> = specs.iter().map(|s| (2.0 * n as f64).powi(-s.exponent() as i32)).collect();
    let width = specs.len();
    let chunks = cfg.count.div_ceil(CHUNK);

    let results: Vec<(Vec<f64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let lo = ch * CHUNK;
            let hi = (lo + CHUNK).min(cfg.count);
            let mut vals = Vec::with_capacity((hi - lo) * width);
            let mut discarded = 0u64;
            for i in lo..hi {
                let s = match cfg.sampler {
                    Sampler::Haar => {
                        let (s, d) = sample_from_stream(ensemble, n, cfg.seed, i as u64, cfg.eigen);
                        discarded += d as u64;
                        s
                    }
                    Sampler::Metropolis => {
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                        rng.set_stream(i as u64);
                        sample_weyl_metropolis(ensemble, n, cfg.sweeps, &mut rng)
                    }
                };
                let d = char_derivs_at_one(&s, max_order);
                vals.extend(specs.iter().zip(&scales).map(|(spec, sc)| spec.eval(&d) * sc));
            }
            (vals, discarded)
        })
        .collect();

    let discarded = results.iter().map(|r| r.1).sum();
    let mut columns = vec![Vec::with_capacity(cfg.count); width];
    for (vals, _) in &results {
        for row in vals.chunks_exact(width) {
            for (col, v) in columns.iter_mut().zip(row) {
                col.push(*v);
            }
        }
    }

    specs
        .iter()
        .zip(columns)
        .map(|(spec, col)| {
            let count = col.len() as f64;
            let mean = pairwise_sum(&col) / count;
            let dev: Vec<f64> = col.iter().map(|v| (v - mean) * (v - mean)).collect();
            let var = pairwise_sum(&dev) / (count - 1.0);
            let se = (var / count).sqrt();
            if !mean.is_finite() || !se.is_finite() {
                return Err(Error::NonFinite(format!("{spec:?} at N = {n}")));
            }
            let exponent = spec.exponent();
            let back = (2.0 * n as f64).powi(exponent as i32);
            Ok(MomentEstimate {
                query: *spec,
                n,
                sample_count: col.len(),
                mean: mean * back,
                stderr: se * back,
                exponent,
                normalized_mean: mean,
                normalized_stderr: se,
                discarded,
            })
        })
        .collect()
}

pub fn estimate_moment(n: usize, spec: &MomentSpec, cfg: &McConfig) -> Result<MomentEstimate> {
    Ok(estimate_moments(n, std::slice::from_ref(spec), cfg)?.remove(0))
}

/// Monte Carlo moment against its leading-order prediction `b (2N)^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub ensemble: Ensemble,
    #[serde(rename = "N")]
    pub n: usize,
    pub k1: u32,
    pub k2: u32,
    pub n1: u32,
    pub n2: u32,
    pub count: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// `b` as an exact rational string.
    pub coefficient: String,
    pub exponent: i64,
    pub predicted: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub z: f64,
    pub discarded: u64,
}

/// Reports for several queries of one ensemble over shared draws; `b` comes from
/// the combinatorial formula.
pub fn asymptotic_report(n: usize, specs: &[MomentSpec], cfg: &McConfig) -> Result<Vec<AsymptoticReport>> {
    let coeffs = specs
        .iter()
        .map(|s| coefficient(&s.query()?, Backend::Comb))
        .collect::<Result<Vec<_>>>()?;
    let estimates = estimate_moments(n, specs, cfg)?;
    Ok(specs
        .iter()
        .zip(coeffs)
        .zip(estimates)
        .map(|((s, b), est)| {
            let bf = to_f64(&b.value);
            let ratio = est.normalized_mean / bf;
            let ratio_stderr = est.normalized_stderr / bf.abs();
            AsymptoticReport {
                ensemble: s.ensemble,
                n,
                k1: s.k1,
                k2: s.k2,
                n1: s.n1,
                n2: s.n2,
                count: est.sample_count,
                seed: cfg.seed,
                mean: est.mean,
                stderr: est.stderr,
                coefficient: b.value.to_string(),
                exponent: est.exponent,
                predicted: bf * (2.0 * n as f64).powi(est.exponent as i32),
                ratio,
                ratio_stderr,
                z: (ratio - 1.0) / ratio_stderr,
                discarded: est.discarded,
            }
        })
        .collect())
}
