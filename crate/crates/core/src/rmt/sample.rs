use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::linalg::{
    form_q, householder_qr, jacobi_eigenvalues, quaternion_hermitian_tridiagonalize,
    quaternion_to_real_symmetric, symmetric_tridiagonalize, tridiagonal_eigenvalues_split,
    QuaternionQr,
};
use super::quaternion::Quaternion;
use super::HaarSample;
use crate::coefficients::Ensemble;

/// Eigenvalue solver used on the symmetric / Hermitian part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenBackend {
    /// Householder tridiagonalization followed by implicit QL.
    #[default]
    Tridiagonal,
    /// Cyclic Jacobi on the full matrix (the symplectic case goes through the
    /// real `4N x 4N` image).
    Jacobi,
}

/// Why a draw was discarded.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum SampleFailure {
    #[error("eigenvalue iteration exceeded its budget")]
    NoConvergence,
    #[error("eigenvalues failed to pair up (gap {0:e})")]
    Unpaired(f64),
    #[error("expected fixed eigenvalue {expected} but the extreme eigenvalue was {found}")]
    MissingFixed { expected: f64, found: f64 },
}

/// Tolerance for pairing repeated eigenvalues and locating the fixed ones.
pub const PAIR_TOL: f64 = 1e-8;
const QL_ITER: usize = 60;
/// Off-diagonal entries this small are treated as exact zeros of the
/// tridiagonal form (eigenvalue error at most this much).
const SPLIT_TOL: f64 = 1e-10;
const JACOBI_SWEEPS: usize = 60;

/// A Haar orthogonal matrix (column-major) with its determinant.
#[derive(Clone, Debug)]
pub struct OrthogonalDraw {
    pub dim: usize,
    pub matrix: Vec<f64>,
    pub det: f64,
}

/// Haar O(dim) conditioned on `det = want` by resampling. The determinant is
/// read off the QR factors before `Q` is formed, so rejected draws are cheap.
fn orthogonal_component<R: Rng + ?Sized>(dim: usize, want: Option<f64>, rng: &mut R) -> OrthogonalDraw {
    loop {
        let mut a: Vec<f64> = (0..dim * dim).map(|_| rng.sample(StandardNormal)).collect();
        let tau = householder_qr(&mut a, dim);
        let signs: Vec<f64> = (0..dim).map(|j| a[j * dim + j].signum()).collect();
        let reflections = tau.iter().filter(|&&t| t != 0.0).count();
        let mut det: f64 = signs.iter().product();
        if reflections % 2 == 1 {
            det = -det;
        }
        if want.is_some_and(|w| w != det) {
            continue;
        }
        // Q diag(sign R_jj) is Haar
        let mut q = form_q(&a, &tau, dim);
        for (col, s) in q.chunks_exact_mut(dim).zip(&signs) {
            if *s < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
        return OrthogonalDraw { dim, matrix: q, det };
    }
}

/// Haar-distributed element of O(dim).
pub fn haar_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OrthogonalDraw {
    orthogonal_component(dim, None, rng)
}

/// Haar-distributed element of the compact symplectic group, as an `n x n`
/// column-major quaternion matrix with `U^* U = I`.
pub fn haar_symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Quaternion> {
    let a: Vec<Quaternion> = (0..n * n)
        .map(|_| {
            Quaternion::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            )
        })
        .collect();
    let qr = QuaternionQr::new(a, n);
    // phases making the diagonal of R positive real
    let phases: Vec<Quaternion> = qr
        .diag
        .iter()
        .map(|&d| {
            let r = d.norm();
            if r > 0.0 {
                d.scale(1.0 / r)
            } else {
                Quaternion::ONE
            }
        })
        .collect();
    qr.form_q(&phases)
}

/// `2n x 2n` complex realization `[[A, B], [-conj B, conj A]]` of `U = A + B j`,
/// row-major.
pub fn quaternion_to_complex(u: &[Quaternion], n: usize) -> Vec<Complex64> {
    let m = 2 * n;
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    for c in 0..n {
        for r in 0..n {
            let ((a_re, a_im), (b_re, b_im)) = u[c * n + r].to_complex_pair();
            let (a, b) = (Complex64::new(a_re, a_im), Complex64::new(b_re, b_im));
            out[r * m + c] = a;
            out[r * m + c + n] = b;
            out[(r + n) * m + c] = -b.conj();
            out[(r + n) * m + c + n] = a.conj();
        }
    }
    out
}

fn pair_up(values: &[f64]) -> Result<Vec<f64>, SampleFailure> {
    values
        .chunks_exact(2)
        .map(|p| {
            let gap = (p[1] - p[0]).abs();
            if gap > PAIR_TOL {
                Err(SampleFailure::Unpaired(gap))
            } else {
                Ok(0.5 * (p[0] + p[1]))
            }
        })
        .collect()
}

fn angles_from_cosines(c: &[f64]) -> Vec<f64> {
    c.iter().map(|x| x.clamp(-1.0, 1.0).acos()).collect()
}

fn symmetric_eigenvalues(mut s: Vec<f64>, n: usize, backend: EigenBackend) -> Result<Vec<f64>, SampleFailure> {
    match backend {
        EigenBackend::Tridiagonal => {
            let (d, e) = symmetric_tridiagonalize(&mut s, n);
            tridiagonal_eigenvalues_split(d, &e, SPLIT_TOL, QL_ITER)
        }
        EigenBackend::Jacobi => jacobi_eigenvalues(s, n, JACOBI_SWEEPS),
    }
    .map_err(|_| SampleFailure::NoConvergence)
}

fn orthogonal_sample<R: Rng + ?Sized>(
    n: usize,
    minus: bool,
    rng: &mut R,
    backend: EigenBackend,
) -> Result<HaarSample, SampleFailure> {
    let dim = 2 * n;
    let draw = orthogonal_component(dim, Some(if minus { -1.0 } else { 1.0 }), rng);
    let q = &draw.matrix;
    let mut s = vec![0.0; dim * dim];
    for c in 0..dim {
        for r in 0..dim {
            s[c * dim + r] = 0.5 * (q[c * dim + r] + q[r * dim + c]);
        }
    }
    let mut ev = symmetric_eigenvalues(s, dim, backend)?;
    let mut fixed = Vec::new();
    if minus {
        // eigenvalues +1 and -1 of the matrix are the extremes of its
        // symmetric part, since every pair contributes cos(theta) in [-1, 1]
        let (lo, hi) = (ev[0], ev[dim - 1]);
        if (hi - 1.0).abs() > PAIR_TOL {
            return Err(SampleFailure::MissingFixed { expected: 1.0, found: hi });
        }
        if (lo + 1.0).abs() > PAIR_TOL {
            return Err(SampleFailure::MissingFixed { expected: -1.0, found: lo });
        }
        ev = ev[1..dim - 1].to_vec();
        fixed = vec![1.0, -1.0];
    }
    let cosines = pair_up(&ev)?;
    Ok(HaarSample { angles: angles_from_cosines(&cosines), fixed_eigs: fixed })
}

fn symplectic_sample<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    backend: EigenBackend,
) -> Result<HaarSample, SampleFailure> {
    let u = haar_symplectic(n, rng);
    let mut h = vec![Quaternion::ZERO; n * n];
    for c in 0..n {
        for r in 0..n {
            h[c * n + r] = (u[c * n + r] + u[r * n + c].conj()).scale(0.5);
        }
    }
    let cosines = match backend {
        EigenBackend::Tridiagonal => {
            let (d, e) = quaternion_hermitian_tridiagonalize(&mut h, n);
            tridiagonal_eigenvalues_split(d, &e, SPLIT_TOL, QL_ITER).map_err(|_| SampleFailure::NoConvergence)?
        }
        EigenBackend::Jacobi => {
            let ev = jacobi_eigenvalues(quaternion_to_real_symmetric(&h, n), 4 * n, JACOBI_SWEEPS)
                .map_err(|_| SampleFailure::NoConvergence)?;
            let mut out = Vec::with_capacity(n);
            for quad in ev.chunks_exact(4) {
                let gap = quad[3] - quad[0];
                if gap > PAIR_TOL {
                    return Err(SampleFailure::Unpaired(gap));
                }
                out.push(0.25 * quad.iter().sum::<f64>());
            }
            out
        }
    };
    Ok(HaarSample { angles: angles_from_cosines(&cosines), fixed_eigs: Vec::new() })
}

/// One Haar draw from the ensemble of `2N x 2N` matrices.
pub fn sample<R: Rng + ?Sized>(
    ensemble: Ensemble,
    n: usize,
    rng: &mut R,
    backend: EigenBackend,
) -> Result<HaarSample, SampleFailure> {
    assert!(n >= 1, "N must be at least 1");
    match ensemble {
        Ensemble::Sp => symplectic_sample(n, rng, backend),
        Ensemble::So => orthogonal_sample(n, false, rng, backend),
        Ensemble::Ominus => orthogonal_sample(n, true, rng, backend),
    }
}

/// Draw number `index` of the stream keyed by `seed`: a pure function of its
/// arguments. Failed draws are retried from the same stream; returns the sample
/// and how many draws were discarded.
pub fn sample_from_stream(
    ensemble: Ensemble,
    n: usize,
    seed: u64,
    index: u64,
    backend: EigenBackend,
) -> (HaarSample, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut discarded = 0;
    loop {
        match sample(ensemble, n, &mut rng, backend) {
            Ok(s) => return (s, discarded),
            Err(_) => discarded += 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_is_orthogonal_with_stated_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1, 2, 5, 8] {
            for want in [1.0, -1.0] {
                let d = orthogonal_component(dim, Some(want), &mut rng);
                let q = &d.matrix;
                for i in 0..dim {
                    for j in 0..dim {
                        let dot: f64 = (0..dim).map(|k| q[i * dim + k] * q[j * dim + k]).sum();
                        let want_dot = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - want_dot).abs() < 1e-12);
                    }
                }
                assert_eq!(d.det, want);
                assert!((det_lu(q, dim) - want).abs() < 1e-10);
            }
        }
    }

    fn det_lu(m: &[f64], n: usize) -> f64 {
        let mut a = m.to_vec();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[k * n + x].abs().total_cmp(&a[k * n + y].abs())).unwrap();
            if p != k {
                for c in 0..n {
                    a.swap(c * n + k, c * n + p);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det *= piv;
            for r in k + 1..n {
                let f = a[k * n + r] / piv;
                for c in k..n {
                    a[c * n + r] -= f * a[c * n + k];
                }
            }
        }
        det
    }

    #[test]
    fn symplectic_complex_form_is_unitary_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 4;
        let u = haar_symplectic(n, &mut rng);
        let m = 2 * n;
        let a = quaternion_to_complex(&u, n);
        for i in 0..m {
            for j in 0..m {
                // (A^* A)_{ij}
                let s: Complex64 = (0..m).map(|k| a[k * m + i].conj() * a[k * m + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12);
                // (A^T J A)_{ij} with J = [[0, I], [-I, 0]]
                let t: Complex64 = (0..n)
                    .map(|k| a[k * m + i] * a[(k + n) * m + j] - a[(k + n) * m + i] * a[k * m + j])
                    .sum();
                let want = if j == i + n {
                    1.0
                } else if i == j + n {
                    -1.0
                } else {
                    0.0
                };
                assert!((t - want).norm() < 1e-12, "({i},{j}) {t}");
            }
        }
    }

    #[test]
    fn samples_have_the_right_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            for backend in [EigenBackend::Tridiagonal, EigenBackend::Jacobi] {
                for e in [Ensemble::Sp, Ensemble::So, Ensemble::Ominus] {
                    let s = sample(e, n, &mut rng, backend).unwrap();
                    assert_eq!(s.dim(), 2 * n);
                    assert!(s.angles.iter().all(|t| (0.0..=std::f64::consts::PI).contains(t)));
                    let want_det = if e == Ensemble::Ominus { -1.0 } else { 1.0 };
                    assert_eq!(s.det(), want_det);
                    assert_eq!(s.fixed_eigs.len(), if e == Ensemble::Ominus { 2 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn backends_see_the_same_spectrum() {
        for e in [Ensemble::Sp, Ensemble::So, Ensemble::Ominus] {
            let mut r1 = ChaCha8Rng::seed_from_u64(9);
            let mut r2 = ChaCha8Rng::seed_from_u64(9);
            let a = sample(e, 5, &mut r1, EigenBackend::Tridiagonal).unwrap();
            let b = sample(e, 5, &mut r2, EigenBackend::Jacobi).unwrap();
            for (x, y) in a.angles.iter().zip(&b.angles) {
                assert!((x.cos() - y.cos()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn symplectic_angles_match_complex_eigenvalues() {
        // trace of U in the complex form is 2 sum cos(theta)
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 5;
        let u = haar_symplectic(n, &mut rng);
        let trace: f64 = (0..n).map(|i| u[i * n + i].a).sum::<f64>() * 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = sample(Ensemble::Sp, n, &mut rng, EigenBackend::Tridiagonal).unwrap();
        let from_angles: f64 = s.angles.iter().map(|t| 2.0 * t.cos()).sum();
        assert!((trace - from_angles).abs() < 1e-10);
    }

    #[test]
    fn stream_is_a_pure_function() {
        let a = sample_from_stream(Ensemble::Sp, 3, 42, 17, EigenBackend::Tridiagonal);
        let b = sample_from_stream(Ensemble::Sp, 3, 42, 17, EigenBackend::Tridiagonal);
        let c = sample_from_stream(Ensemble::Sp, 3, 42, 18, EigenBackend::Tridiagonal);
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }
}
