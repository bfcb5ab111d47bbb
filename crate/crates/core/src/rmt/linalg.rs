//! Dense kernels for the samplers: Householder QR, reduction to tridiagonal
//! form, implicit QL and cyclic Jacobi. All matrices are square, column-major.

use super::quaternion::Quaternion;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoConvergence;

#[inline]
fn idx(n: usize, r: usize, c: usize) -> usize {
    c * n + r
}

/// Reflector `I - tau v v^T` (with `v_0 = 1`) mapping `x` to `beta e_0`.
/// Overwrites `x[1..]` with the tail of `v`; returns `(beta, tau)`.
fn real_reflector(x: &mut [f64]) -> (f64, f64) {
    let x0 = x[0];
    let tail_sq: f64 = x[1..].iter().map(|v| v * v).sum();
    if tail_sq == 0.0 && x0 >= 0.0 {
        return (x0, 0.0);
    }
    let norm = (x0 * x0 + tail_sq).sqrt();
    let beta = if x0 >= 0.0 { -norm } else { norm };
    let tau = (beta - x0) / beta;
    let scale = 1.0 / (x0 - beta);
    x[1..].iter_mut().for_each(|v| *v *= scale);
    (beta, tau)
}

/// In-place QR. Afterwards the upper triangle holds `R` and the strict lower
/// triangle the reflector tails; returns the `tau`s (the last is 0).
pub fn householder_qr(a: &mut [f64], n: usize) -> Vec<f64> {
    let mut tau = vec![0.0; n];
    for j in 0..n.saturating_sub(1) {
        let (head, rest) = a.split_at_mut((j + 1) * n);
        let col = &mut head[idx(n, j, j)..];
        let (beta, t) = real_reflector(col);
        col[0] = beta;
        tau[j] = t;
        if t == 0.0 {
            continue;
        }
        let v = &col[1..];
        for c in rest.chunks_exact_mut(n) {
            let tgt = &mut c[j..];
            let s = t * (tgt[0] + dot(v, &tgt[1..]));
            tgt[0] -= s;
            axpy(-s, v, &mut tgt[1..]);
        }
    }
    tau
}

/// Explicit `Q = H_0 H_1 ... H_{n-2}` from the output of [`householder_qr`].
pub fn form_q(qr: &[f64], tau: &[f64], n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[idx(n, i, i)] = 1.0;
    }
    for j in (0..n.saturating_sub(1)).rev() {
        let t = tau[j];
        if t == 0.0 {
            continue;
        }
        let v = &qr[idx(n, j + 1, j)..(j + 1) * n];
        for c in j..n {
            let tgt = &mut q[idx(n, j, c)..(c + 1) * n];
            let s = t * (tgt[0] + dot(v, &tgt[1..]));
            tgt[0] -= s;
            axpy(-s, v, &mut tgt[1..]);
        }
    }
    q
}

/// Dot product with independent partial sums, which lets the compiler
/// vectorize (a single running sum would serialize every addition).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form. Reads and
/// updates only the lower triangle (the rest is ignored and left stale).
/// Returns the diagonal and the subdiagonal.
pub fn symmetric_tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let (beta, tau) = real_reflector(&mut a[idx(n, k + 1, k)..(k + 1) * n]);
        e[k] = beta;
        if tau == 0.0 {
            continue;
        }
        v[0] = 1.0;
        v[1..m].copy_from_slice(&a[idx(n, k + 2, k)..(k + 1) * n]);
        let v = &v[..m];
        let p = &mut p[..m];
        // p = tau B v from the lower triangle of the trailing block B
        p.iter_mut().for_each(|x| *x = 0.0);
        for c in 0..m {
            let col = &a[idx(n, k + 1 + c, k + 1 + c)..(k + 2 + c) * n];
            let vc = tau * v[c];
            p[c] += col[0] * vc;
            let below = &col[1..];
            p[c] += tau * dot(below, &v[c + 1..]);
            axpy(vc, below, &mut p[c + 1..]);
        }
        let kk = 0.5 * tau * dot(p, v);
        axpy(-kk, v, p);
        // B -= v p^T + p v^T, lower triangle only
        for c in 0..m {
            let col = &mut a[idx(n, k + 1 + c, k + 1 + c)..(k + 2 + c) * n];
            let (vc, pc) = (v[c], p[c]);
            for ((x, vi), pi) in col.iter_mut().zip(&v[c..]).zip(&p[c..]) {
                *x -= vi * pc + pi * vc;
            }
        }
    }
    if n >= 2 {
        e[n - 2] = a[idx(n, n - 1, n - 2)];
    }
    let d = (0..n).map(|i| a[idx(n, i, i)]).collect();
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix `(d, e)` by implicit QL with
/// Wilkinson-type shifts, sorted ascending.
pub fn tridiagonal_eigenvalues(
    mut d: Vec<f64>,
    sub: &[f64],
    max_iter: usize,
) -> Result<Vec<f64>, NoConvergence> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..sub.len()].copy_from_slice(sub);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_iter {
                return Err(NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Like [`tridiagonal_eigenvalues`], but first cuts the matrix at every
/// off-diagonal entry with `|e_k| <= split_tol` and solves the blocks
/// separately. Each cut moves eigenvalues by at most `split_tol`; repeated
/// eigenvalues otherwise leave tiny but not negligible couplings that slow QL down.
pub fn tridiagonal_eigenvalues_split(
    d: Vec<f64>,
    sub: &[f64],
    split_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, NoConvergence> {
    let mut out = Vec::with_capacity(d.len());
    let mut start = 0;
    for end in 1..=d.len() {
        if end == d.len() || sub[end - 1].abs() <= split_tol {
            let block = tridiagonal_eigenvalues(d[start..end].to_vec(), &sub[start..end - 1], max_iter)?;
            out.extend(block);
            start = end;
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending.
pub fn jacobi_eigenvalues(
    mut a: Vec<f64>,
    n: usize,
    max_sweeps: usize,
) -> Result<Vec<f64>, NoConvergence> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut converged = n < 2;
    for _ in 0..max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|c| (0..c).map(move |r| (r, c)))
            .map(|(r, c)| a[idx(n, r, c)].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(n, p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[idx(n, p, p)], a[idx(n, q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    // columns p, q
                    let (akp, akq) = (a[idx(n, k, p)], a[idx(n, k, q)]);
                    a[idx(n, k, p)] = c * akp - s * akq;
                    a[idx(n, k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    // rows p, q
                    let (apk, aqk) = (a[idx(n, p, k)], a[idx(n, q, k)]);
                    a[idx(n, p, k)] = c * apk - s * aqk;
                    a[idx(n, q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    if !converged {
        return Err(NoConvergence);
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[idx(n, i, i)]).collect();
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Quaternion reflector `I - tau v v^*` with `v = x - alpha e_0`,
/// `alpha = -(x_0/|x_0|) |x|`, mapping `x` to `alpha e_0`. Overwrites `x` with `v`
/// and returns `(alpha, tau)`; `tau = 0` when `x` is already zero.
fn quaternion_reflector(x: &mut [Quaternion]) -> (Quaternion, f64) {
    let norm_sq: f64 = x.iter().map(|q| q.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return (Quaternion::ZERO, 0.0);
    }
    let norm = norm_sq.sqrt();
    let x0 = x[0];
    let a0 = x0.norm();
    let unit = if a0 > 0.0 { x0.scale(1.0 / a0) } else { Quaternion::ONE };
    let alpha = unit.scale(-norm);
    x[0] = x0 - alpha;
    // v^* v = |v_0|^2 + |tail|^2 = 2 |x| (|x| + |x_0|)
    let tau = 1.0 / (norm * (norm + a0));
    (alpha, tau)
}

/// Quaternion Householder QR of a column-major `n x n` matrix.
pub struct QuaternionQr {
    n: usize,
    /// Reflector vectors (full, in place below and on the diagonal).
    v: Vec<Quaternion>,
    tau: Vec<f64>,
    /// Diagonal of `R`.
    pub diag: Vec<Quaternion>,
}

impl QuaternionQr {
    pub fn new(mut a: Vec<Quaternion>, n: usize) -> Self {
        let mut tau = vec![0.0; n];
        let mut diag = vec![Quaternion::ZERO; n];
        for j in 0..n {
            if j + 1 == n {
                diag[j] = a[idx(n, j, j)];
                break;
            }
            let (head, rest) = a.split_at_mut((j + 1) * n);
            let col = &mut head[idx(n, j, j)..];
            let (alpha, t) = quaternion_reflector(col);
            diag[j] = alpha;
            tau[j] = t;
            if t == 0.0 {
                continue;
            }
            for c in rest.chunks_exact_mut(n) {
                apply_reflector(col, t, &mut c[j..]);
            }
        }
        Self { n, v: a, tau, diag }
    }

    /// `Q = H_0 ... H_{n-2}`, each column then multiplied on the right by
    /// the corresponding entry of `right`.
    pub fn form_q(&self, right: &[Quaternion]) -> Vec<Quaternion> {
        let n = self.n;
        let mut q = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            q[idx(n, i, i)] = Quaternion::ONE;
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let t = self.tau[j];
            if t == 0.0 {
                continue;
            }
            let v = &self.v[idx(n, j, j)..(j + 1) * n];
            for c in j..n {
                apply_reflector(v, t, &mut q[idx(n, j, c)..(c + 1) * n]);
            }
        }
        for (c, col) in q.chunks_exact_mut(n).enumerate() {
            col.iter_mut().for_each(|x| *x = *x * right[c]);
        }
        q
    }
}

/// `y <- (I - tau v v^*) y`.
#[inline]
fn apply_reflector(v: &[Quaternion], tau: f64, y: &mut [Quaternion]) {
    let mut s = Quaternion::ZERO;
    for (vi, yi) in v.iter().zip(y.iter()) {
        s += vi.conj_mul(*yi);
    }
    let s = s.scale(tau);
    for (vi, yi) in v.iter().zip(y.iter_mut()) {
        *yi -= *vi * s;
    }
}

/// Reduction of a quaternion Hermitian matrix (column-major, destroyed) to a
/// real symmetric tridiagonal matrix with the same eigenvalues. Returns the
/// diagonal and the subdiagonal.
pub fn quaternion_hermitian_tridiagonalize(
    h: &mut [Quaternion],
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![Quaternion::ZERO; n];
    let mut z = vec![Quaternion::ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let col = &mut h[idx(n, k + 1, k)..(k + 1) * n];
        let (alpha, tau) = quaternion_reflector(col);
        // the off-diagonal alpha is unitarily similar to |alpha| by a
        // diagonal phase change, which leaves the spectrum alone
        e[k] = alpha.norm();
        if tau == 0.0 {
            continue;
        }
        v[..m].copy_from_slice(col);
        let v = &v[..m];
        let z = &mut z[..m];
        // w = B v
        z.iter_mut().for_each(|x| *x = Quaternion::ZERO);
        for (c, &vc) in v.iter().enumerate() {
            let bcol = &h[idx(n, k + 1, k + 1 + c)..(k + 2 + c) * n];
            for (zi, bi) in z.iter_mut().zip(bcol) {
                *zi += *bi * vc;
            }
        }
        let gamma: f64 = v.iter().zip(z.iter()).map(|(vi, wi)| vi.conj_mul(*wi).a).sum();
        let half = 0.5 * tau * gamma;
        for (zi, vi) in z.iter_mut().zip(v) {
            *zi -= vi.scale(half);
        }
        // B <- B - tau (v z^* + z v^*)
        for c in 0..m {
            let bcol = &mut h[idx(n, k + 1, k + 1 + c)..(k + 2 + c) * n];
            let zc = z[c].conj().scale(tau);
            let vc = v[c].conj().scale(tau);
            for ((b, vi), zi) in bcol.iter_mut().zip(v).zip(z.iter()) {
                *b -= *vi * zc + *zi * vc;
            }
        }
    }
    if n >= 2 {
        e[n - 2] = h[idx(n, n - 1, n - 2)].norm();
    }
    let d = (0..n).map(|i| h[idx(n, i, i)].a).collect();
    (d, e)
}

/// Real `4n x 4n` symmetric image of a quaternion Hermitian matrix under left
/// multiplication; every eigenvalue appears four times.
pub fn quaternion_to_real_symmetric(h: &[Quaternion], n: usize) -> Vec<f64> {
    let m = 4 * n;
    let mut out = vec![0.0; m * m];
    for c in 0..n {
        for r in 0..n {
            let q = h[idx(n, r, c)];
            let block = [
                [q.a, -q.b, -q.c, -q.d],
                [q.b, q.a, -q.d, q.c],
                [q.c, q.d, q.a, -q.b],
                [q.d, -q.c, q.b, q.a],
            ];
            for (i, row) in block.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    out[idx(m, 4 * r + i, 4 * c + j)] = x;
                }
            }
        }
    }
    out
}
