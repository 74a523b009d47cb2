//! 3x3 same-padding convolution (cross-correlation), stride 1.

use super::NnError;
use crate::tensor::Tensor;

fn check_shapes(input: &Tensor, kernel: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize, usize), NnError> {
    let ishape = input.shape();
    let kshape = kernel.shape();
    if ishape.len() != 3 {
        return Err(NnError::ShapeMismatch(format!(
            "conv2d input must be [H, W, Cin], got {ishape:?}"
        )));
    }
    if kshape.len() != 4 || kshape[0] != 3 || kshape[1] != 3 {
        return Err(NnError::ShapeMismatch(format!(
            "conv2d kernel must be [3, 3, Cin, Cout], got {kshape:?}"
        )));
    }
    let (h, w, cin) = (ishape[0], ishape[1], ishape[2]);
    let cout = kshape[3];
    if kshape[2] != cin {
        return Err(NnError::ShapeMismatch(format!(
            "kernel expects {} input channels, input has {cin}",
            kshape[2]
        )));
    }
    if bias.shape() != [cout] {
        return Err(NnError::ShapeMismatch(format!(
            "bias must be [{cout}], got {:?}",
            bias.shape()
        )));
    }
    Ok((h, w, cin, cout))
}

/// `out[h][w][co] = bias[co] + sum_{dh,dw,ci} in[h+dh-1][w+dw-1][ci] * k[dh][dw][ci][co]`
/// with zero padding of one pixel on each border, so the spatial dims
/// are preserved.
pub fn conv2d_forward(input: &Tensor, kernel: &Tensor, bias: &Tensor) -> Result<Tensor, NnError> {
    let (h, w, cin, cout) = check_shapes(input, kernel, bias)?;
    let x = input.data();
    let k = kernel.data();
    let mut out = vec![0.0; h * w * cout];

    for oy in 0..h {
        for ox in 0..w {
            let out_off = (oy * w + ox) * cout;
            out[out_off..out_off + cout].copy_from_slice(bias.data());
            for dy in 0..3usize {
                let iy = (oy + dy).wrapping_sub(1);
                if iy >= h {
                    continue;
                }
                for dx in 0..3usize {
                    let ix = (ox + dx).wrapping_sub(1);
                    if ix >= w {
                        continue;
                    }
                    let in_off = (iy * w + ix) * cin;
                    let k_off = (dy * 3 + dx) * cin * cout;
                    for ci in 0..cin {
                        let xv = x[in_off + ci];
                        let k_row = &k[k_off + ci * cout..k_off + (ci + 1) * cout];
                        let o_row = &mut out[out_off..out_off + cout];
                        for (o, &kv) in o_row.iter_mut().zip(k_row) {
                            *o += xv * kv;
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::new(vec![h, w, cout], out).expect("conv output shape"))
}

/// Gradients of a scalar loss with respect to input, kernel, and bias,
/// given the loss gradient at the convolution output.
pub fn conv2d_backward(
    input: &Tensor,
    kernel: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor), NnError> {
    let ishape = input.shape();
    let kshape = kernel.shape();
    let (h, w, cin) = (ishape[0], ishape[1], ishape[2]);
    let cout = kshape[3];
    if grad_out.shape() != [h, w, cout] {
        return Err(NnError::ShapeMismatch(format!(
            "grad_out must be [{h}, {w}, {cout}], got {:?}",
            grad_out.shape()
        )));
    }
    let x = input.data();
    let k = kernel.data();
    let g = grad_out.data();

    let mut gx = vec![0.0; h * w * cin];
    let mut gk = vec![0.0; k.len()];
    let mut gb = vec![0.0; cout];

    for oy in 0..h {
        for ox in 0..w {
            let g_off = (oy * w + ox) * cout;
            let g_row = &g[g_off..g_off + cout];
            for (b, &gv) in gb.iter_mut().zip(g_row) {
                *b += gv;
            }
            for dy in 0..3usize {
                let iy = (oy + dy).wrapping_sub(1);
                if iy >= h {
                    continue;
                }
                for dx in 0..3usize {
                    let ix = (ox + dx).wrapping_sub(1);
                    if ix >= w {
                        continue;
                    }
                    let in_off = (iy * w + ix) * cin;
                    let k_off = (dy * 3 + dx) * cin * cout;
                    for ci in 0..cin {
                        let xv = x[in_off + ci];
                        let k_row = &k[k_off + ci * cout..k_off + (ci + 1) * cout];
                        let gk_row = &mut gk[k_off + ci * cout..k_off + (ci + 1) * cout];
                        let mut acc = 0.0;
                        for ((gkv, &kv), &gv) in gk_row.iter_mut().zip(k_row).zip(g_row) {
                            *gkv += xv * gv;
                            acc += kv * gv;
                        }
                        gx[in_off + ci] += acc;
                    }
                }
            }
        }
    }
    Ok((
        Tensor::new(vec![h, w, cin], gx).expect("grad input shape"),
        Tensor::new(kshape.to_vec(), gk).expect("grad kernel shape"),
        Tensor::new(vec![cout], gb).expect("grad bias shape"),
    ))
}
