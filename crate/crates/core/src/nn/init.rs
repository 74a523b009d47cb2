//! he_normal weight initialization.

use crate::tensor::Tensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One standard normal draw via Box-Muller. Kept in-house so seeded
/// tensors are bit-for-bit reproducible regardless of rand_distr's
/// internals.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], keeps ln finite
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// I.i.d. normal samples with mean 0 and stddev sqrt(2 / fan_in).
pub fn he_normal_init(shape: Vec<usize>, fan_in: usize, rng: &mut ChaCha8Rng) -> Tensor {
    assert!(fan_in > 0, "fan_in must be positive");
    let sd = (2.0 / fan_in as f64).sqrt();
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = sd * standard_normal(rng);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn fan_in_8_has_stddev_half() {
        assert_eq!((2.0f64 / 8.0).sqrt(), 0.5);
    }

    #[test]
    fn sample_stddev_tracks_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let t = he_normal_init(vec![n], 8, &mut rng);
        let mean = t.data().iter().sum::<f64>() / n as f64;
        let var = t.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        assert!((sd - 0.5).abs() / 0.5 < 0.02, "sample sd {sd}");
        assert!(mean.abs() < 0.01, "sample mean {mean}");
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(31);
        let mut b = ChaCha8Rng::seed_from_u64(31);
        let ta = he_normal_init(vec![3, 3, 2, 4], 18, &mut a);
        let tb = he_normal_init(vec![3, 3, 2, 4], 18, &mut b);
        assert_eq!(ta.data(), tb.data());
    }
}
