//! Central finite-difference gradient checking.
//!
//! Used throughout the test suites to validate the analytic backward
//! passes: perturb one coordinate at a time, evaluate the loss twice,
//! and compare the quotient against the implementation's gradient.

/// Central difference gradient of `f` at `x` with the given step.
pub fn central_diff<F>(mut f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let hi = f(&probe);
        probe[i] = orig - step;
        let lo = f(&probe);
        probe[i] = orig;
        grad.push((hi - lo) / (2.0 * step));
    }
    grad
}

/// Default step used by the gradient checks.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Worst relative error between an analytic and a numeric gradient.
///
/// The error of a component pair is `|a - n| / max(|a|, |n|, FLOOR)`;
/// the floor keeps finite-difference roundoff on near-zero components
/// from registering as disagreement (it amounts to an absolute
/// tolerance of `FLOOR * rtol` there).
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    const FLOOR: f64 = 1e-3;
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(FLOOR))
        .fold(0.0, f64::max)
}
