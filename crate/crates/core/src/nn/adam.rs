//! Adam optimizer with bias correction.

use super::{NnError, Param};
use crate::tensor::Tensor;

/// Per-model optimizer state. Moment tensors are laid out in the same
/// order as the parameter list handed to [`AdamState::step`]; the first
/// call sizes them, later calls must present the same parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn with_hyper(mut self, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self.epsilon = epsilon;
        self
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One bias-corrected update: `theta -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [&mut Param]) -> Result<(), NnError> {
        if self.m.is_empty() && self.t == 0 {
            self.m = params.iter().map(|p| Tensor::zeros(p.value.shape().to_vec())).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != params.len() {
            return Err(NnError::UninitializedState(format!(
                "moments track {} parameters, step got {}",
                self.m.len(),
                params.len()
            )));
        }
        for (i, p) in params.iter().enumerate() {
            if self.m[i].shape() != p.value.shape() {
                return Err(NnError::UninitializedState(format!(
                    "moment {i} has shape {:?}, parameter has {:?}",
                    self.m[i].shape(),
                    p.value.shape()
                )));
            }
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, p) in params.iter_mut().enumerate() {
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let g = p.grad.data();
            let theta = p.value.data_mut();
            for j in 0..g.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                theta[j] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_fresh_params_unchanged() {
        let mut p = Param::new(Tensor::new(vec![3], vec![1.0, -2.0, 0.5]).unwrap());
        let before = p.value.clone();
        let mut adam = AdamState::new(0.001);
        adam.step(&mut [&mut p]).unwrap();
        assert_eq!(p.value, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_closed_form() {
        let mut p = Param::new(Tensor::new(vec![1], vec![0.0]).unwrap());
        p.grad.data_mut()[0] = 1.0;
        let mut adam = AdamState::new(0.001);
        adam.step(&mut [&mut p]).unwrap();
        // m_hat = 1, v_hat = 1: delta = -lr / (1 + eps)
        let want = -0.001 / (1.0 + 1e-7);
        assert!((p.value.data()[0] - want).abs() < 1e-15);
    }

    #[test]
    fn drives_quadratic_to_zero() {
        // f(theta) = theta^2, gradient 2 theta; lr sized so 200 steps reach the optimum
        let mut p = Param::new(Tensor::new(vec![1], vec![1.0]).unwrap());
        let mut adam = AdamState::new(0.1);
        for _ in 0..200 {
            let theta = p.value.data()[0];
            p.grad.data_mut()[0] = 2.0 * theta;
            adam.step(&mut [&mut p]).unwrap();
        }
        assert!(p.value.data()[0].abs() < 0.01, "theta = {}", p.value.data()[0]);
    }

    #[test]
    fn mismatched_param_count_is_an_error() {
        let mut a = Param::new(Tensor::zeros(vec![2]));
        let mut b = Param::new(Tensor::zeros(vec![2]));
        let mut adam = AdamState::new(0.001);
        adam.step(&mut [&mut a, &mut b]).unwrap();
        let err = adam.step(&mut [&mut a]).unwrap_err();
        assert!(matches!(err, NnError::UninitializedState(_)));
    }

    #[test]
    fn moments_decay_without_gradient_after_history() {
        let mut p = Param::new(Tensor::new(vec![1], vec![1.0]).unwrap());
        let mut adam = AdamState::new(0.01);
        p.grad.data_mut()[0] = 1.0;
        adam.step(&mut [&mut p]).unwrap();
        let after_first = p.value.data()[0];
        p.zero_grad();
        adam.step(&mut [&mut p]).unwrap();
        // residual momentum still moves the parameter
        assert_ne!(p.value.data()[0], after_first);
    }
}
