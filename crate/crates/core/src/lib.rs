//! Sequence-recognition engine for license plates: a dense-tensor
//! substrate, layer kernels with analytic backprop, CTC loss and
//! decoders, the CRNN model with binary checkpoints, detection metrics,
//! and dataset tooling including a deterministic synthetic generator.

pub mod ctc;
pub mod data;
pub mod detect;
pub mod gradcheck;
pub mod model;
pub mod nn;
pub mod tensor;

pub use ctc::{LabelSequence, ProbMatrix, SymbolAlphabet};
pub use data::{PlateSample, SplitSpec};
pub use detect::{BoundingBox, Detection, MatchReport};
pub use model::{Crnn, CrnnConfig, ModelError};
pub use nn::{AdamState, Param};
pub use tensor::Tensor;
