//! 2x2 max pooling with stride 2; trailing odd rows/columns are dropped.

use super::NnError;
use crate::tensor::Tensor;

/// Backward bookkeeping: input shape plus, per output cell, the flat
/// input index that held the window maximum.
#[derive(Debug, Clone)]
pub struct MaxPoolCache {
    input_shape: Vec<usize>,
    argmax: Vec<usize>,
}

/// Per 2x2 window, the maximum. Ties go to the first maximal element in
/// row-major scan order so the backward routing is deterministic.
pub fn maxpool2_forward(input: &Tensor) -> Result<(Tensor, MaxPoolCache), NnError> {
    let shape = input.shape();
    if shape.len() != 3 {
        return Err(NnError::ShapeMismatch(format!(
            "maxpool input must be [H, W, C], got {shape:?}"
        )));
    }
    let (h, w, c) = (shape[0], shape[1], shape[2]);
    if h < 2 || w < 2 {
        return Err(NnError::ShapeMismatch(format!(
            "maxpool needs H >= 2 and W >= 2, got {h}x{w}"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = vec![0.0; oh * ow * c];
    let mut argmax = vec![0usize; oh * ow * c];

    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..c {
                let mut best_idx = ((2 * oy) * w + 2 * ox) * c + ch;
                let mut best = x[best_idx];
                for dy in 0..2 {
                    for dx in 0..2 {
                        let idx = ((2 * oy + dy) * w + 2 * ox + dx) * c + ch;
                        if x[idx] > best {
                            best = x[idx];
                            best_idx = idx;
                        }
                    }
                }
                let o = (oy * ow + ox) * c + ch;
                out[o] = best;
                argmax[o] = best_idx;
            }
        }
    }
    Ok((
        Tensor::new(vec![oh, ow, c], out).expect("pool output shape"),
        MaxPoolCache {
            input_shape: shape.to_vec(),
            argmax,
        },
    ))
}

/// Routes each output gradient to the input cell that won its window.
pub fn maxpool2_backward(cache: &MaxPoolCache, grad_out: &Tensor) -> Result<Tensor, NnError> {
    if grad_out.len() != cache.argmax.len() {
        return Err(NnError::ShapeMismatch(format!(
            "grad_out has {} elements, pool produced {}",
            grad_out.len(),
            cache.argmax.len()
        )));
    }
    let mut gx = Tensor::zeros(cache.input_shape.clone());
    for (&src, &g) in cache.argmax.iter().zip(grad_out.data()) {
        gx.data_mut()[src] += g;
    }
    Ok(gx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{central_diff, max_rel_err, DEFAULT_STEP};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_window() {
        let input = Tensor::new(vec![2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, _) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1]);
        assert_eq!(out.data(), &[4.0]);
    }

    #[test]
    fn odd_edges_dropped() {
        let input = Tensor::new(vec![5, 5, 1], (0..25).map(|v| v as f64).collect()).unwrap();
        let (out, _) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), &[2, 2, 1]);
        // windows never touch row/col 4
        assert_eq!(out.data(), &[6.0, 8.0, 16.0, 18.0]);
    }

    #[test]
    fn rejects_degenerate_input() {
        let input = Tensor::zeros(vec![1, 4, 1]);
        assert!(matches!(
            maxpool2_forward(&input),
            Err(NnError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn backward_routes_to_argmax_and_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shape = vec![4, 6, 2];
        let n: usize = shape.iter().product();
        // distinct values so the argmax is stable under the probe step
        let mut vals: Vec<f64> = (0..n).map(|i| i as f64 * 0.37).collect();
        for v in vals.iter_mut() {
            *v += rng.gen_range(-0.1..0.1);
        }
        let input = Tensor::new(shape.clone(), vals).unwrap();
        let weights: Vec<f64> = (0..2 * 3 * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let (out, cache) = maxpool2_forward(&input).unwrap();
        let grad_out = Tensor::new(out.shape().to_vec(), weights.clone()).unwrap();
        let gx = maxpool2_backward(&cache, &grad_out).unwrap();

        // gradient is nonzero only on argmax cells
        let nonzero = gx.data().iter().filter(|v| **v != 0.0).count();
        assert!(nonzero <= cache.argmax.len());

        let numeric = central_diff(
            |v| {
                let t = Tensor::new(shape.clone(), v.to_vec()).unwrap();
                let (o, _) = maxpool2_forward(&t).unwrap();
                o.data().iter().zip(&weights).map(|(a, b)| a * b).sum()
            },
            input.data(),
            DEFAULT_STEP,
        );
        assert!(max_rel_err(gx.data(), &numeric) <= 1e-5);
    }
}
