//! Random-walk Metropolis on the eigenangle density. Only a cross-check for
//! the matrix samplers: each call runs its own chain from a uniform start.

use std::f64::consts::PI;

use rand::Rng;

use super::HaarSample;
use crate::coefficients::Ensemble;

/// Log of the unnormalized eigenangle density: `prod_{i<j} (cos t_i - cos t_j)^2`
/// times `prod sin^2 t_i` for Sp and O^- (whose free angles follow Sp(2N-2)).
fn log_density(angles: &[f64], sine_weight: bool) -> f64 {
    let c: Vec<f64> = angles.iter().map(|t| t.cos()).collect();
    let mut out = 0.0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            out += 2.0 * (c[i] - c[j]).abs().ln();
        }
        if sine_weight {
            out += 2.0 * angles[i].sin().abs().ln();
        }
    }
    out
}

fn reflect(mut t: f64) -> f64 {
    // fold onto [0, pi]; the proposal stays symmetric
    t = t.rem_euclid(2.0 * PI);
    if t > PI {
        2.0 * PI - t
    } else {
        t
    }
}

/// Eigenangles after `sweeps` single-site Metropolis sweeps.
pub fn sample_weyl_metropolis<R: Rng + ?Sized>(
    ensemble: Ensemble,
    n: usize,
    sweeps: usize,
    rng: &mut R,
) -> HaarSample {
    let (m, sine, fixed) = match ensemble {
        Ensemble::Sp => (n, true, vec![]),
        Ensemble::So => (n, false, vec![]),
        Ensemble::Ominus => (n - 1, true, vec![1.0, -1.0]),
    };
    let mut angles: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..PI)).collect();
    let mut current = log_density(&angles, sine);
    let step = 0.6;
    for _ in 0..sweeps {
        for i in 0..m {
            let old = angles[i];
            angles[i] = reflect(old + rng.gen_range(-step..step));
            let proposed = log_density(&angles, sine);
            let accept = proposed >= current || rng.gen::<f64>().ln() < proposed - current;
            if accept {
                current = proposed;
            } else {
                angles[i] = old;
            }
        }
    }
    HaarSample { angles, fixed_eigs: fixed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sp1_mean_cosine_square() {
        // under (2/pi) sin^2 on [0, pi], E[cos^2] = 1/4
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 4000;
        let mean: f64 = (0..draws)
            .map(|_| sample_weyl_metropolis(Ensemble::Sp, 1, 40, &mut rng).angles[0].cos().powi(2))
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.25).abs() < 0.02, "{mean}");
    }

    #[test]
    fn ominus_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = sample_weyl_metropolis(Ensemble::Ominus, 3, 5, &mut rng);
        assert_eq!(s.angles.len(), 2);
        assert_eq!(s.fixed_eigs, vec![1.0, -1.0]);
    }
}
