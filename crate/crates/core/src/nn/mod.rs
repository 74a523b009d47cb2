//! Layer kernels with analytic forward and backward passes.
//!
//! Each layer is a pair of free functions: `*_forward` returns the output
//! plus whatever cache the matching `*_backward` needs. Parameters are
//! plain tensors owned by the caller; gradients come back as tensors so
//! the model can accumulate them into [`Param`] slots.

mod adam;
mod conv;
mod dense;
mod dropout;
mod init;
mod lstm;
mod pool;

pub use adam::AdamState;
pub use conv::{conv2d_backward, conv2d_forward};
pub use dense::{dense_backward, dense_forward, softmax_rows, Activation, DenseCache};
pub use dropout::{dropout_backward, dropout_forward};
pub use init::he_normal_init;
pub use lstm::{
    bilstm_backward, bilstm_forward, lstm_backward, lstm_forward, BilstmCache, Direction,
    LstmCache, LstmGrads, LstmParams,
};
pub use pool::{maxpool2_backward, maxpool2_forward, MaxPoolCache};

use crate::tensor::Tensor;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("uninitialized optimizer state: {0}")]
    UninitializedState(String),
}

/// A trainable tensor and its gradient accumulator.
///
/// `value.shape == grad.shape` always; gradients are zeroed at the start
/// of each training step and summed across the batch.
#[derive(Debug, Clone)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
}

impl Param {
    pub fn new(value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape().to_vec());
        Self { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.data_mut().fill(0.0);
    }
}
