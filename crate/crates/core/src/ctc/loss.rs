//! CTC loss: log-space forward dynamic program over the blank-extended
//! label, the matching alpha-beta gradient, and an exhaustive-path
//! oracle for verification.

use super::{collapse, log_add, CtcError, LabelSequence, ProbMatrix, SymbolAlphabet};
use crate::tensor::Tensor;

/// Blank-interleaved label: `- l1 - l2 - ... - lL -`, length 2L + 1.
fn extend_label(label: &LabelSequence, blank: usize) -> Vec<usize> {
    let mut ext = Vec::with_capacity(2 * label.len() + 1);
    ext.push(blank);
    for &id in label.ids() {
        ext.push(id);
        ext.push(blank);
    }
    ext
}

fn check_inputs(probs: &ProbMatrix, label: &LabelSequence, alphabet: &SymbolAlphabet) -> Result<(), CtcError> {
    if probs.classes() != alphabet.size() {
        return Err(CtcError::DegenerateRow(format!(
            "matrix has {} classes, alphabet needs {}",
            probs.classes(),
            alphabet.size()
        )));
    }
    probs.check_stochastic()?;
    if let Some(&bad) = label.ids().iter().find(|&&id| id >= alphabet.blank_id()) {
        return Err(CtcError::InvalidLabel(format!("label id {bad} out of range")));
    }
    if probs.steps() < label.min_frames() {
        return Err(CtcError::InfeasibleLabel(format!(
            "label needs at least {} frames, matrix has {}",
            label.min_frames(),
            probs.steps()
        )));
    }
    Ok(())
}

/// Log-space forward pass; returns the full alpha table (T x S) and the
/// extended label.
fn forward_table(probs: &ProbMatrix, ext: &[usize]) -> (Vec<f64>, usize) {
    let t_steps = probs.steps();
    let s_len = ext.len();
    let lp = |t: usize, c: usize| probs.row(t)[c].ln();
    let mut alpha = vec![f64::NEG_INFINITY; t_steps * s_len];

    alpha[0] = lp(0, ext[0]);
    if s_len > 1 {
        alpha[1] = lp(0, ext[1]);
    }
    for t in 1..t_steps {
        for s in 0..s_len {
            let mut acc = alpha[(t - 1) * s_len + s];
            if s >= 1 {
                acc = log_add(acc, alpha[(t - 1) * s_len + s - 1]);
            }
            // Skip over the separating blank between distinct symbols.
            // ext alternates blank/symbol, so a skip into a blank would
            // have ext[s] == ext[s-2] and is excluded by the same test.
            if s >= 2 && ext[s] != ext[s - 2] {
                acc = log_add(acc, alpha[(t - 1) * s_len + s - 2]);
            }
            alpha[t * s_len + s] = acc + lp(t, ext[s]);
        }
    }
    (alpha, s_len)
}

fn total_log_prob(alpha: &[f64], t_steps: usize, s_len: usize) -> f64 {
    let last = alpha[(t_steps - 1) * s_len + s_len - 1];
    if s_len >= 2 {
        log_add(last, alpha[(t_steps - 1) * s_len + s_len - 2])
    } else {
        last
    }
}

/// Negative log of the total probability of all paths collapsing to
/// `label`, by the forward dynamic program in log space.
pub fn ctc_loss(
    probs: &ProbMatrix,
    label: &LabelSequence,
    alphabet: &SymbolAlphabet,
) -> Result<f64, CtcError> {
    check_inputs(probs, label, alphabet)?;
    let ext = extend_label(label, alphabet.blank_id());
    let (alpha, s_len) = forward_table(probs, &ext);
    let log_p = total_log_prob(&alpha, probs.steps(), s_len);
    if log_p == f64::NEG_INFINITY {
        return Err(CtcError::NoValidPath);
    }
    Ok(-log_p)
}

/// Verification oracle: enumerate every one of the C^T paths, sum the
/// probabilities of those that collapse to `label`, and return the
/// negative log of the sum. Guarded to C^T <= 1e7.
pub fn ctc_bruteforce(
    probs: &ProbMatrix,
    label: &LabelSequence,
    alphabet: &SymbolAlphabet,
) -> Result<f64, CtcError> {
    let (t_steps, classes) = (probs.steps(), probs.classes());
    if classes != alphabet.size() {
        return Err(CtcError::DegenerateRow(format!(
            "matrix has {classes} classes, alphabet needs {}",
            alphabet.size()
        )));
    }
    probs.check_stochastic()?;
    let path_count = (classes as f64).powi(t_steps as i32);
    if path_count > 1e7 {
        return Err(CtcError::TooLarge(format!(
            "{classes}^{t_steps} paths exceed the 1e7 guard"
        )));
    }

    let mut path = vec![0usize; t_steps];
    let mut total = 0.0f64;
    loop {
        if collapse(&path, alphabet) == *label {
            let mut p = 1.0;
            for (t, &c) in path.iter().enumerate() {
                p *= probs.row(t)[c];
            }
            total += p;
        }
        // odometer increment
        let mut t = 0;
        loop {
            if t == t_steps {
                if total == 0.0 {
                    return Err(CtcError::NoValidPath);
                }
                return Ok(-total.ln());
            }
            path[t] += 1;
            if path[t] < classes {
                break;
            }
            path[t] = 0;
            t += 1;
        }
    }
}

/// Exact gradient of [`ctc_loss`] with respect to the pre-softmax
/// logits that produced `probs`, via the alpha-beta formulation:
/// `grad[t][k] = y[t][k] - (1/P) * sum_{s: ext[s]=k} alpha[t][s] beta[t][s] / y[t][k]`.
pub fn ctc_gradient(
    probs: &ProbMatrix,
    label: &LabelSequence,
    alphabet: &SymbolAlphabet,
) -> Result<Tensor, CtcError> {
    check_inputs(probs, label, alphabet)?;
    let ext = extend_label(label, alphabet.blank_id());
    let (t_steps, classes) = (probs.steps(), probs.classes());
    let (alpha, s_len) = forward_table(probs, &ext);
    let log_p = total_log_prob(&alpha, t_steps, s_len);
    if log_p == f64::NEG_INFINITY {
        return Err(CtcError::NoValidPath);
    }

    // beta in the same convention as alpha (both include the emission
    // at step t, so alpha*beta double-counts it; divided back out below)
    let lp = |t: usize, c: usize| probs.row(t)[c].ln();
    let mut beta = vec![f64::NEG_INFINITY; t_steps * s_len];
    beta[(t_steps - 1) * s_len + s_len - 1] = lp(t_steps - 1, ext[s_len - 1]);
    if s_len >= 2 {
        beta[(t_steps - 1) * s_len + s_len - 2] = lp(t_steps - 1, ext[s_len - 2]);
    }
    for t in (0..t_steps.saturating_sub(1)).rev() {
        for s in 0..s_len {
            let mut acc = beta[(t + 1) * s_len + s];
            if s + 1 < s_len {
                acc = log_add(acc, beta[(t + 1) * s_len + s + 1]);
            }
            if s + 2 < s_len && ext[s] != ext[s + 2] {
                acc = log_add(acc, beta[(t + 1) * s_len + s + 2]);
            }
            beta[t * s_len + s] = acc + lp(t, ext[s]);
        }
    }

    let mut grad = Tensor::zeros(vec![t_steps, classes]);
    for t in 0..t_steps {
        // gather log sum of alpha*beta per class at this frame
        let mut per_class = vec![f64::NEG_INFINITY; classes];
        for (s, &c) in ext.iter().enumerate() {
            let ab = alpha[t * s_len + s] + beta[t * s_len + s];
            per_class[c] = log_add(per_class[c], ab);
        }
        for k in 0..classes {
            let y = probs.row(t)[k];
            let q = if per_class[k] == f64::NEG_INFINITY {
                0.0
            } else {
                (per_class[k] - log_p - y.ln()).exp()
            };
            grad.data_mut()[t * classes + k] = y - q;
        }
    }
    Ok(grad)
}
