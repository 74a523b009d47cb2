//! The recognition model: the CRNN stack, its training step, and the
//! binary checkpoint format.

mod checkpoint;
mod crnn;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use crnn::{Crnn, GradientSet};

use crate::ctc::CtcError;
use crate::nn::NnError;
use crate::tensor::TensorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Ctc(#[from] CtcError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("non-finite loss ({0}); step aborted")]
    NonFiniteLoss(f64),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint version {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("io failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

impl From<TensorError> for ModelError {
    fn from(e: TensorError) -> Self {
        ModelError::ShapeMismatch(e.to_string())
    }
}

/// Network hyperparameters. The default is the production stack:
/// 200x50 grayscale in, two conv/pool blocks (32 and 64 units), a
/// 32-unit dense bottleneck, bidirectional LSTMs of 128 and 64 hidden
/// units, and a 38-class softmax (37 symbols + blank).
#[derive(Debug, Clone, PartialEq)]
pub struct CrnnConfig {
    pub input_width: usize,
    pub input_height: usize,
    pub conv1_units: usize,
    pub conv2_units: usize,
    pub dense_units: usize,
    pub lstm1_hidden: usize,
    pub lstm2_hidden: usize,
    pub classes: usize,
    pub dropout_rates: [f64; 3],
}

impl Default for CrnnConfig {
    fn default() -> Self {
        Self {
            input_width: 200,
            input_height: 50,
            conv1_units: 32,
            conv2_units: 64,
            dense_units: 32,
            lstm1_hidden: 128,
            lstm2_hidden: 64,
            classes: 38,
            dropout_rates: [0.2, 0.25, 0.25],
        }
    }
}

/// Class count of the plate recognizer (37 symbols + blank).
pub const PLATE_CLASSES: usize = 38;

impl CrnnConfig {
    /// A tiny stack for end-to-end gradient checking.
    pub fn shrunken() -> Self {
        Self {
            input_width: 16,
            input_height: 8,
            conv1_units: 2,
            conv2_units: 3,
            dense_units: 4,
            lstm1_hidden: 4,
            lstm2_hidden: 8,
            classes: 4,
            dropout_rates: [0.0, 0.0, 0.0],
        }
    }

    /// Sequence length seen by the recurrent layers: the image width
    /// after two 2x2 poolings.
    pub fn time_steps(&self) -> usize {
        self.input_width / 4
    }

    /// Height after two poolings (floor semantics).
    pub fn pooled_height(&self) -> usize {
        (self.input_height / 2) / 2
    }

    /// Features per time step after the map from feature maps to the
    /// sequence: pooled height times conv2 channels.
    pub fn feature_width(&self) -> usize {
        self.pooled_height() * self.conv2_units
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            self.input_width,
            self.input_height,
            self.conv1_units,
            self.conv2_units,
            self.dense_units,
            self.lstm1_hidden,
            self.lstm2_hidden,
        ];
        if positive.iter().any(|&v| v == 0) {
            return Err(ModelError::ConfigInvalid("zero-sized dimension".into()));
        }
        if self.classes < 2 {
            return Err(ModelError::ConfigInvalid(format!(
                "need at least one symbol plus the blank, got {} classes",
                self.classes
            )));
        }
        if self.input_width % 4 != 0 {
            return Err(ModelError::ConfigInvalid(format!(
                "input width {} must be divisible by 4 (two 2x2 poolings define the time axis)",
                self.input_width
            )));
        }
        if self.input_height < 4 {
            return Err(ModelError::ConfigInvalid(format!(
                "input height {} leaves nothing after two poolings",
                self.input_height
            )));
        }
        if self.dropout_rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(ModelError::ConfigInvalid(format!(
                "dropout rates {:?} must lie in [0, 1)",
                self.dropout_rates
            )));
        }
        // a plate-sized output head must fit the standard 8-character
        // label in its extended form (2L + 1 frames)
        if self.classes == PLATE_CLASSES && self.time_steps() < 2 * crate::data::MAX_LABEL_LEN + 1 {
            return Err(ModelError::ConfigInvalid(format!(
                "{} time steps cannot carry an 8-symbol plate label",
                self.time_steps()
            )));
        }
        Ok(())
    }
}
