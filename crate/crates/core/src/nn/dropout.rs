//! Inverted dropout: survivors are rescaled at training time so
//! inference is a plain identity.

use crate::tensor::Tensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Returns the output and the multiplier mask (0 or 1/(1-rate) per
/// element; all ones outside training). Backward is `grad * mask`.
pub fn dropout_forward(
    input: &Tensor,
    rate: f64,
    training: bool,
    rng: &mut ChaCha8Rng,
) -> (Tensor, Tensor) {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    if !training || rate == 0.0 {
        return (input.clone(), Tensor::filled(input.shape().to_vec(), 1.0));
    }
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let mut mask = Tensor::zeros(input.shape().to_vec());
    for m in mask.data_mut() {
        *m = if rng.gen::<f64>() < rate { 0.0 } else { scale };
    }
    let out = input.mul(&mask).expect("mask shape matches input");
    (out, mask)
}

pub fn dropout_backward(mask: &Tensor, grad_out: &Tensor) -> Tensor {
    grad_out.mul(mask).expect("mask shape matches grad")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn rate_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let input = Tensor::new(vec![4], vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let (out, mask) = dropout_forward(&input, 0.0, true, &mut rng);
        assert_eq!(out, input);
        assert!(mask.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn inference_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let input = Tensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        let (out, _) = dropout_forward(&input, 0.25, false, &mut rng);
        assert_eq!(out, input);
    }

    #[test]
    fn training_preserves_mean_in_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 100_000;
        let input = Tensor::filled(vec![n], 1.0);
        let (out, _) = dropout_forward(&input, 0.25, true, &mut rng);
        let mean = out.data().iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn fixed_seed_reproduces_mask() {
        let input = Tensor::filled(vec![64], 2.0);
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let (oa, ma) = dropout_forward(&input, 0.5, true, &mut a);
        let (ob, mb) = dropout_forward(&input, 0.5, true, &mut b);
        assert_eq!(oa, ob);
        assert_eq!(ma, mb);
    }

    #[test]
    fn backward_applies_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let input = Tensor::filled(vec![32], 1.0);
        let (_, mask) = dropout_forward(&input, 0.5, true, &mut rng);
        let grad = Tensor::filled(vec![32], 3.0);
        let gi = dropout_backward(&mask, &grad);
        for (g, m) in gi.data().iter().zip(mask.data()) {
            assert_eq!(*g, 3.0 * m);
        }
    }
}
