//! Affine layer over the last axis, with optional relu or row softmax.

use super::NnError;
use crate::tensor::{matmul, transpose, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
    Softmax,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    input2d: Tensor,
    pre_act: Tensor,
    out2d: Tensor,
    activation: Activation,
    out_shape: Vec<usize>,
    in_shape: Vec<usize>,
}

/// Numerically stable softmax along each row of a rank-2 tensor.
pub fn softmax_rows(logits: &Tensor) -> Tensor {
    assert_eq!(logits.shape().len(), 2, "softmax_rows needs rank 2");
    let (rows, cols) = (logits.shape()[0], logits.shape()[1]);
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        let row = logits.row(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let o = &mut out[r * cols..(r + 1) * cols];
        let mut sum = 0.0;
        for (dst, &v) in o.iter_mut().zip(row) {
            let e = (v - m).exp();
            *dst = e;
            sum += e;
        }
        for dst in o.iter_mut() {
            *dst /= sum;
        }
    }
    Tensor::new(vec![rows, cols], out).expect("softmax shape")
}

fn flatten_rows(input: &Tensor, fin: usize) -> Result<Tensor, NnError> {
    let last = *input.shape().last().unwrap();
    if last != fin {
        return Err(NnError::ShapeMismatch(format!(
            "dense expects last dim {fin}, input is {:?}",
            input.shape()
        )));
    }
    let rows = input.len() / fin;
    Ok(input.reshape(vec![rows, fin]).expect("row flatten"))
}

/// `out = act(input . weights + bias)` applied along the last axis.
/// Leading axes are carried through unchanged.
pub fn dense_forward(
    input: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    activation: Activation,
) -> Result<(Tensor, DenseCache), NnError> {
    if weights.shape().len() != 2 {
        return Err(NnError::ShapeMismatch(format!(
            "dense weights must be [Fin, Fout], got {:?}",
            weights.shape()
        )));
    }
    let (fin, fout) = (weights.shape()[0], weights.shape()[1]);
    if bias.shape() != [fout] {
        return Err(NnError::ShapeMismatch(format!(
            "dense bias must be [{fout}], got {:?}",
            bias.shape()
        )));
    }
    let input2d = flatten_rows(input, fin)?;
    let mut pre = matmul(&input2d, weights).map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let rows = pre.shape()[0];
    for r in 0..rows {
        let row = &mut pre.data_mut()[r * fout..(r + 1) * fout];
        for (v, b) in row.iter_mut().zip(bias.data()) {
            *v += b;
        }
    }
    let out2d = match activation {
        Activation::None => pre.clone(),
        Activation::Relu => {
            let mut o = pre.clone();
            for v in o.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            o
        }
        Activation::Softmax => softmax_rows(&pre),
    };
    let mut out_shape = input.shape().to_vec();
    *out_shape.last_mut().unwrap() = fout;
    let out = out2d.reshape(out_shape.clone()).expect("dense out shape");
    Ok((
        out,
        DenseCache {
            input2d,
            pre_act: pre,
            out2d,
            activation,
            out_shape,
            in_shape: input.shape().to_vec(),
        },
    ))
}

/// Gradients w.r.t. input, weights, and bias given the loss gradient at
/// the activation output.
pub fn dense_backward(
    cache: &DenseCache,
    weights: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor), NnError> {
    if grad_out.shape() != cache.out_shape.as_slice() {
        return Err(NnError::ShapeMismatch(format!(
            "grad_out shape {:?}, expected {:?}",
            grad_out.shape(),
            cache.out_shape
        )));
    }
    let fout = weights.shape()[1];
    let rows = cache.pre_act.shape()[0];
    let g2d = grad_out.reshape(vec![rows, fout]).expect("grad flatten");

    // grad through the activation into the pre-activation
    let mut gz = Tensor::zeros(vec![rows, fout]);
    match cache.activation {
        Activation::None => gz.data_mut().copy_from_slice(g2d.data()),
        Activation::Relu => {
            for (i, (&z, &g)) in cache.pre_act.data().iter().zip(g2d.data()).enumerate() {
                gz.data_mut()[i] = if z > 0.0 { g } else { 0.0 };
            }
        }
        Activation::Softmax => {
            // gz = y * (g - sum(g * y)) per row
            for r in 0..rows {
                let y = cache.out2d.row(r);
                let g = &g2d.data()[r * fout..(r + 1) * fout];
                let dot: f64 = y.iter().zip(g).map(|(a, b)| a * b).sum();
                let dst = &mut gz.data_mut()[r * fout..(r + 1) * fout];
                for ((d, &yv), &gv) in dst.iter_mut().zip(y).zip(g) {
                    *d = yv * (gv - dot);
                }
            }
        }
    }

    let grad_w = matmul(&transpose(&cache.input2d), &gz).map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let mut grad_b = Tensor::zeros(vec![fout]);
    for r in 0..rows {
        let row = &gz.data()[r * fout..(r + 1) * fout];
        for (b, &g) in grad_b.data_mut().iter_mut().zip(row) {
            *b += g;
        }
    }
    let grad_in2d = matmul(&gz, &transpose(weights)).map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let grad_in = grad_in2d.reshape(cache.in_shape.clone()).expect("grad in shape");
    Ok((grad_in, grad_w, grad_b))
}
