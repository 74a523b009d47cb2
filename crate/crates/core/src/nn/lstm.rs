//! LSTM recurrence and its bidirectional composition.
//!
//! Gate blocks along the 4H axis are ordered (input, forget, candidate,
//! output); the checkpoint format relies on this layout.

use super::NnError;
use crate::tensor::{matmul, transpose, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Fwd,
    /// Processes the reversed sequence and reverses its output, so row t
    /// of the result still lines up with input row t.
    Bwd,
}

/// Weights of one LSTM direction: `wx [Fin, 4H]`, `wh [H, 4H]`, `b [4H]`.
#[derive(Debug, Clone)]
pub struct LstmParams {
    pub wx: Tensor,
    pub wh: Tensor,
    pub b: Tensor,
}

impl LstmParams {
    pub fn hidden(&self) -> usize {
        self.wh.shape()[0]
    }

    pub fn input_features(&self) -> usize {
        self.wx.shape()[0]
    }

    fn validate(&self) -> Result<(usize, usize), NnError> {
        let (fin, four_h) = (self.wx.shape()[0], self.wx.shape()[1]);
        if four_h % 4 != 0 {
            return Err(NnError::ShapeMismatch(format!(
                "gate axis must be 4H, got {four_h}"
            )));
        }
        let h = four_h / 4;
        if self.wh.shape() != [h, four_h] || self.b.shape() != [four_h] {
            return Err(NnError::ShapeMismatch(format!(
                "inconsistent LSTM params: wx {:?}, wh {:?}, b {:?}",
                self.wx.shape(),
                self.wh.shape(),
                self.b.shape()
            )));
        }
        Ok((fin, h))
    }
}

#[derive(Debug, Clone)]
pub struct LstmCache {
    /// Input in internal (already reversed for Bwd) time order.
    seq: Tensor,
    /// Activated gates per step, packed [T, 4H] as (i, f, g, o).
    gates: Tensor,
    /// Cell states per step, [T, H].
    cell: Tensor,
    /// tanh(cell) per step, [T, H].
    tanh_cell: Tensor,
    /// Hidden states per step in internal order, [T, H].
    hidden: Tensor,
    direction: Direction,
}

#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub seq: Tensor,
    pub wx: Tensor,
    pub wh: Tensor,
    pub b: Tensor,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn reverse_rows(t: &Tensor) -> Tensor {
    let (rows, cols) = (t.shape()[0], t.shape()[1]);
    let mut out = Tensor::zeros(vec![rows, cols]);
    for r in 0..rows {
        out.data_mut()[(rows - 1 - r) * cols..(rows - r) * cols].copy_from_slice(t.row(r));
    }
    out
}

/// Standard LSTM over `seq [T, Fin]` with h0 = c0 = 0; returns `[T, H]`.
pub fn lstm_forward(
    seq: &Tensor,
    params: &LstmParams,
    direction: Direction,
) -> Result<(Tensor, LstmCache), NnError> {
    let (fin, h) = params.validate()?;
    if seq.shape().len() != 2 || seq.shape()[1] != fin {
        return Err(NnError::ShapeMismatch(format!(
            "sequence must be [T, {fin}], got {:?}",
            seq.shape()
        )));
    }
    let t_steps = seq.shape()[0];
    let seq_eff = match direction {
        Direction::Fwd => seq.clone(),
        Direction::Bwd => reverse_rows(seq),
    };

    // Input projection for every step at once.
    let mut zx = matmul(&seq_eff, &params.wx).map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let four_h = 4 * h;
    for t in 0..t_steps {
        let row = &mut zx.data_mut()[t * four_h..(t + 1) * four_h];
        for (v, b) in row.iter_mut().zip(params.b.data()) {
            *v += b;
        }
    }

    let mut gates = Tensor::zeros(vec![t_steps, four_h]);
    let mut cell = Tensor::zeros(vec![t_steps, h]);
    let mut tanh_cell = Tensor::zeros(vec![t_steps, h]);
    let mut hidden = Tensor::zeros(vec![t_steps, h]);
    let wh = params.wh.data();

    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut z = vec![0.0; four_h];
    for t in 0..t_steps {
        z.copy_from_slice(&zx.data()[t * four_h..(t + 1) * four_h]);
        for (j, &hv) in h_prev.iter().enumerate() {
            if hv != 0.0 {
                let wrow = &wh[j * four_h..(j + 1) * four_h];
                for (zv, &wv) in z.iter_mut().zip(wrow) {
                    *zv += hv * wv;
                }
            }
        }
        let g_row = &mut gates.data_mut()[t * four_h..(t + 1) * four_h];
        for j in 0..h {
            let i_g = sigmoid(z[j]);
            let f_g = sigmoid(z[h + j]);
            let g_g = z[2 * h + j].tanh();
            let o_g = sigmoid(z[3 * h + j]);
            g_row[j] = i_g;
            g_row[h + j] = f_g;
            g_row[2 * h + j] = g_g;
            g_row[3 * h + j] = o_g;
            let c = f_g * c_prev[j] + i_g * g_g;
            let tc = c.tanh();
            cell.data_mut()[t * h + j] = c;
            tanh_cell.data_mut()[t * h + j] = tc;
            hidden.data_mut()[t * h + j] = o_g * tc;
        }
        c_prev.copy_from_slice(&cell.data()[t * h..(t + 1) * h]);
        h_prev.copy_from_slice(&hidden.data()[t * h..(t + 1) * h]);
    }

    let out = match direction {
        Direction::Fwd => hidden.clone(),
        Direction::Bwd => reverse_rows(&hidden),
    };
    Ok((
        out,
        LstmCache {
            seq: seq_eff,
            gates,
            cell,
            tanh_cell,
            hidden,
            direction,
        },
    ))
}

/// Backpropagation through time. `grad_out` is the loss gradient at the
/// layer output (same orientation as the output of [`lstm_forward`]).
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    grad_out: &Tensor,
) -> Result<LstmGrads, NnError> {
    let (_, h) = params.validate()?;
    let t_steps = cache.seq.shape()[0];
    if grad_out.shape() != [t_steps, h] {
        return Err(NnError::ShapeMismatch(format!(
            "grad_out must be [{t_steps}, {h}], got {:?}",
            grad_out.shape()
        )));
    }
    let four_h = 4 * h;
    let g_out = match cache.direction {
        Direction::Fwd => grad_out.clone(),
        Direction::Bwd => reverse_rows(grad_out),
    };

    let gates = cache.gates.data();
    let cell = cache.cell.data();
    let tanh_cell = cache.tanh_cell.data();
    let hidden = cache.hidden.data();
    let wh = params.wh.data();

    let mut dz_all = Tensor::zeros(vec![t_steps, four_h]);
    let mut grad_wh = Tensor::zeros(vec![h, four_h]);
    let mut grad_b = Tensor::zeros(vec![four_h]);

    let mut dh_rec = vec![0.0; h];
    let mut dc_carry = vec![0.0; h];
    for t in (0..t_steps).rev() {
        let dz = &mut dz_all.data_mut()[t * four_h..(t + 1) * four_h];
        for j in 0..h {
            let i_g = gates[t * four_h + j];
            let f_g = gates[t * four_h + h + j];
            let g_g = gates[t * four_h + 2 * h + j];
            let o_g = gates[t * four_h + 3 * h + j];
            let tc = tanh_cell[t * h + j];
            let c_prev = if t > 0 { cell[(t - 1) * h + j] } else { 0.0 };

            let dh = g_out.data()[t * h + j] + dh_rec[j];
            let dc = dc_carry[j] + dh * o_g * (1.0 - tc * tc);

            dz[j] = dc * g_g * i_g * (1.0 - i_g);
            dz[h + j] = dc * c_prev * f_g * (1.0 - f_g);
            dz[2 * h + j] = dc * i_g * (1.0 - g_g * g_g);
            dz[3 * h + j] = dh * tc * o_g * (1.0 - o_g);

            dc_carry[j] = dc * f_g;
        }
        for (b, &d) in grad_b.data_mut().iter_mut().zip(dz.iter()) {
            *b += d;
        }
        // dh_{t-1} = dz . wh^T ; dwh += h_{t-1}^T outer dz
        dh_rec.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..h {
            let wrow = &wh[j * four_h..(j + 1) * four_h];
            let mut acc = 0.0;
            for (d, w) in dz.iter().zip(wrow) {
                acc += d * w;
            }
            dh_rec[j] = acc;
            if t > 0 {
                let hv = hidden[(t - 1) * h + j];
                if hv != 0.0 {
                    let gw = &mut grad_wh.data_mut()[j * four_h..(j + 1) * four_h];
                    for (g, &d) in gw.iter_mut().zip(dz.iter()) {
                        *g += hv * d;
                    }
                }
            }
        }
    }

    let grad_wx = matmul(&transpose(&cache.seq), &dz_all).map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let grad_seq_eff = matmul(&dz_all, &transpose(&params.wx)).map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    let grad_seq = match cache.direction {
        Direction::Fwd => grad_seq_eff,
        Direction::Bwd => reverse_rows(&grad_seq_eff),
    };
    Ok(LstmGrads {
        seq: grad_seq,
        wx: grad_wx,
        wh: grad_wh,
        b: grad_b,
    })
}

#[derive(Debug, Clone)]
pub struct BilstmCache {
    fwd: LstmCache,
    bwd: LstmCache,
    hidden: usize,
}

/// Per time step, the concatenation `[fwd_h(t), bwd_h(t)]`; both
/// directions must share the hidden size.
pub fn bilstm_forward(
    seq: &Tensor,
    fwd: &LstmParams,
    bwd: &LstmParams,
) -> Result<(Tensor, BilstmCache), NnError> {
    let h = fwd.hidden();
    if bwd.hidden() != h {
        return Err(NnError::ShapeMismatch(format!(
            "bilstm directions disagree on hidden size: {h} vs {}",
            bwd.hidden()
        )));
    }
    let (out_f, cache_f) = lstm_forward(seq, fwd, Direction::Fwd)?;
    let (out_b, cache_b) = lstm_forward(seq, bwd, Direction::Bwd)?;
    let t_steps = seq.shape()[0];
    let mut out = Tensor::zeros(vec![t_steps, 2 * h]);
    for t in 0..t_steps {
        out.data_mut()[t * 2 * h..t * 2 * h + h].copy_from_slice(out_f.row(t));
        out.data_mut()[t * 2 * h + h..(t + 1) * 2 * h].copy_from_slice(out_b.row(t));
    }
    Ok((
        out,
        BilstmCache {
            fwd: cache_f,
            bwd: cache_b,
            hidden: h,
        },
    ))
}

/// Splits the output gradient into the two directions and sums their
/// input gradients.
pub fn bilstm_backward(
    fwd: &LstmParams,
    bwd: &LstmParams,
    cache: &BilstmCache,
    grad_out: &Tensor,
) -> Result<(LstmGrads, LstmGrads), NnError> {
    let h = cache.hidden;
    let t_steps = grad_out.shape()[0];
    if grad_out.shape()[1] != 2 * h {
        return Err(NnError::ShapeMismatch(format!(
            "bilstm grad_out must be [T, {}], got {:?}",
            2 * h,
            grad_out.shape()
        )));
    }
    let mut g_f = Tensor::zeros(vec![t_steps, h]);
    let mut g_b = Tensor::zeros(vec![t_steps, h]);
    for t in 0..t_steps {
        g_f.data_mut()[t * h..(t + 1) * h].copy_from_slice(&grad_out.row(t)[..h]);
        g_b.data_mut()[t * h..(t + 1) * h].copy_from_slice(&grad_out.row(t)[h..]);
    }
    let mut grads_f = lstm_backward(fwd, &cache.fwd, &g_f)?;
    let grads_b = lstm_backward(bwd, &cache.bwd, &g_b)?;
    grads_f
        .seq
        .axpy(1.0, &grads_b.seq)
        .map_err(|e| NnError::ShapeMismatch(e.to_string()))?;
    Ok((grads_f, grads_b))
}
