use std::f64::consts::PI;

use charmoments::oracle::weyl_quadrature_moment;
use charmoments::rmt::{
    char_derivs_at_one, estimate_moment, estimate_moments, sample_from_stream, EigenBackend, McConfig, MomentSpec,
    Sampler,
};
use charmoments::Ensemble;

/// Kolmogorov-Smirnov statistic of `xs` against `cdf`.
fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn angles(e: Ensemble, n: usize, count: u64, seed: u64) -> Vec<f64> {
    (0..count).flat_map(|i| sample_from_stream(e, n, seed, i, EigenBackend::Tridiagonal).0.angles).collect()
}

#[test]
fn so2_angle_is_uniform() {
    let xs = angles(Ensemble::So, 1, 20_000, 3);
    let d = ks(xs, |t| t / PI);
    // 0.1% critical value is 1.95 / sqrt(n)
    assert!(d < 1.95 / (20_000f64).sqrt(), "KS distance {d}");
}

#[test]
fn sp2_angle_has_sine_squared_density() {
    let xs = angles(Ensemble::Sp, 1, 20_000, 4);
    let d = ks(xs, |t| (t - t.sin() * t.cos()) / PI);
    assert!(d < 1.95 / (20_000f64).sqrt(), "KS distance {d}");
}

#[test]
fn ominus_small_has_fixed_pair_and_sp_angles() {
    let xs = angles(Ensemble::Ominus, 2, 20_000, 5);
    let d = ks(xs, |t| (t - t.sin() * t.cos()) / PI);
    assert!(d < 1.95 / (20_000f64).sqrt(), "KS distance {d}");
}

#[test]
fn structural_invariants_of_draws() {
    for (e, det, fixed) in [(Ensemble::Sp, 1.0, 0), (Ensemble::So, 1.0, 0), (Ensemble::Ominus, -1.0, 2)] {
        for n in [1, 3, 12] {
            for i in 0..50 {
                let (s, _) = sample_from_stream(e, n, 9, i, EigenBackend::Tridiagonal);
                assert_eq!(s.dim(), 2 * n);
                assert_eq!(s.fixed_eigs.len(), fixed);
                assert_eq!(s.det(), det);
                assert!(s.angles.iter().all(|t| (0.0..=PI).contains(t)));
                let c = s.char_poly();
                // leading coefficient of det(I - sA) is det(A)
                assert!((c[2 * n] - det).abs() < 1e-9);
                // palindromic (det +1) or antipalindromic (det -1)
                for j in 0..=2 * n {
                    assert!((c[j] - det * c[2 * n - j]).abs() < 1e-9 * (1.0 + c[j].abs()));
                }
                let d = char_derivs_at_one(&s, 2);
                match e {
                    Ensemble::Ominus => {
                        assert_eq!(d[0], 0.0);
                        assert!(d[1] <= 0.0 && d[2] <= 0.0);
                    }
                    _ => assert!(d.iter().all(|v| *v >= 0.0)),
                }
                if e == Ensemble::Sp {
                    // symmetric spectrum: Lambda'(1) = N Lambda(1)
                    assert!((d[1] - n as f64 * d[0]).abs() <= 1e-9 * (1.0 + d[1].abs()));
                }
            }
        }
    }
}

#[test]
fn backends_produce_the_same_angles() {
    for e in [Ensemble::Sp, Ensemble::So, Ensemble::Ominus] {
        for i in 0..20 {
            let (a, _) = sample_from_stream(e, 6, 21, i, EigenBackend::Tridiagonal);
            let (b, _) = sample_from_stream(e, 6, 21, i, EigenBackend::Jacobi);
            for (x, y) in a.angles.iter().zip(&b.angles) {
                assert!((x - y).abs() < 1e-6, "{e}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn estimates_are_reproducible_and_thread_independent() {
    let spec = MomentSpec::new(Ensemble::So, 1, 1, 0, 2);
    let cfg = McConfig::new(3000, 17);
    let a = estimate_moment(5, &spec, &cfg).unwrap();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| estimate_moment(5, &spec, &cfg).unwrap());
    let c = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| estimate_moment(5, &spec, &cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    let d = estimate_moment(5, &spec, &McConfig::new(3000, 18)).unwrap();
    assert_ne!(a.mean, d.mean);
}

#[test]
fn haar_estimates_match_quadrature() {
    let cfg = McConfig::new(40_000, 23);
    for e in [Ensemble::Sp, Ensemble::So, Ensemble::Ominus] {
        let specs = [MomentSpec::new(e, 0, 1, 1, 1), MomentSpec::new(e, 1, 1, 1, 2), MomentSpec::new(e, 0, 2, 2, 2)];
        for est in estimate_moments(2, &specs, &cfg).unwrap() {
            let exact = weyl_quadrature_moment(2, &est.query).unwrap();
            assert!((est.mean - exact).abs() <= 4.0 * est.stderr + 1e-12, "{:?}: {} +- {} vs {exact}", est.query, est.mean, est.stderr);
        }
    }
}

#[test]
fn metropolis_sampler_agrees_with_quadrature() {
    let mut cfg = McConfig::new(20_000, 29);
    cfg.sampler = Sampler::Metropolis;
    cfg.sweeps = 100;
    for e in [Ensemble::Sp, Ensemble::So] {
        let spec = MomentSpec::new(e, 0, 1, 0, 1);
        let est = estimate_moment(2, &spec, &cfg).unwrap();
        let exact = weyl_quadrature_moment(2, &spec).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{e}: {} +- {} vs {exact}", est.mean, est.stderr);
    }
}

#[test]
fn lambda_at_one_first_moments() {
    // E[Lambda(1)] = N + 1 on Sp(2N) and 2 on SO(2N)
    let cfg = McConfig::new(20_000, 31);
    let sp = estimate_moment(4, &MomentSpec::new(Ensemble::Sp, 0, 1, 0, 0), &cfg).unwrap();
    assert!((sp.mean - 5.0).abs() <= 4.0 * sp.stderr);
    let so = estimate_moment(4, &MomentSpec::new(Ensemble::So, 0, 1, 0, 0), &cfg).unwrap();
    assert!((so.mean - 2.0).abs() <= 4.0 * so.stderr);
}
