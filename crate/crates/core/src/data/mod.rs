//! Dataset handling: the plate token table, labeled-directory loading
//! with the label-in-filename convention, the deterministic train /
//! val / test split, and a synthetic plate generator.

mod loader;
mod synth;
mod tokens;

pub use loader::{
    load_grayscale_image, load_labeled_dir, load_manifest, resize_bilinear, PLATE_IMAGE_HEIGHT,
    PLATE_IMAGE_WIDTH,
};
pub use synth::{
    all_symbol_ids, digit_ids, glyph_patterns, synth_dataset, synth_plate, synth_plate_styled,
    LengthDist, SynthStyle,
};
pub use tokens::{decode_label, encode_label, id_to_token, plate_alphabet, token_to_id, PAD_TOKEN, PLATE_SYMBOL_COUNT};

use crate::ctc::LabelSequence;
use crate::detect::BoundingBox;
use crate::tensor::Tensor;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Longest label a standard plate can carry.
pub const MAX_LABEL_LEN: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("unknown symbol {symbol:?} in {context}")]
    UnknownSymbol { symbol: char, context: String },
    #[error("unreadable image: {0}")]
    UnreadableImage(String),
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("label too long: {0}")]
    LabelTooLong(String),
    #[error("invalid split spec: {0}")]
    InvalidSplit(String),
    #[error("io error: {0}")]
    Io(String),
}

/// One training or evaluation unit: a grayscale image in [0, 1], its
/// transcription, and optional ground-truth boxes in the image's own
/// pixel space.
#[derive(Debug, Clone)]
pub struct PlateSample {
    pub image: Tensor,
    pub label: LabelSequence,
    pub source_id: String,
    pub truth_boxes: Option<Vec<BoundingBox>>,
}

impl PlateSample {
    pub fn new(
        image: Tensor,
        label: LabelSequence,
        source_id: String,
        truth_boxes: Option<Vec<BoundingBox>>,
    ) -> Result<Self, DataError> {
        if label.len() > MAX_LABEL_LEN {
            return Err(DataError::LabelTooLong(format!(
                "{source_id}: {} symbols, max {MAX_LABEL_LEN}",
                label.len()
            )));
        }
        Ok(Self { image, label, source_id, truth_boxes })
    }
}

/// Split fractions plus the shuffle seed; defaults to the 80/10/10
/// partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, seed: u64) -> Result<Self, DataError> {
        if train < 0.0 || val < 0.0 || test < 0.0 || ((train + val + test) - 1.0).abs() > 1e-9 {
            return Err(DataError::InvalidSplit(format!(
                "fractions ({train}, {val}, {test}) must be non-negative and sum to 1"
            )));
        }
        Ok(Self { train, val, test, seed })
    }

    pub fn eighty_ten_ten(seed: u64) -> Self {
        Self { train: 0.8, val: 0.1, test: 0.1, seed }
    }
}

/// Deterministic shuffle then contiguous partition. Val and test sizes
/// round down; the remainder goes to train.
pub fn split(
    samples: Vec<PlateSample>,
    spec: &SplitSpec,
) -> Result<(Vec<PlateSample>, Vec<PlateSample>, Vec<PlateSample>), DataError> {
    let n = samples.len();
    if n < 10 {
        return Err(DataError::TooFewSamples(format!("{n} samples, need at least 10")));
    }
    let n_val = (spec.val * n as f64).floor() as usize;
    let n_test = (spec.test * n as f64).floor() as usize;
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let mut slots: Vec<Option<PlateSample>> = samples.into_iter().map(Some).collect();
    let take = |slots: &mut Vec<Option<PlateSample>>, idx: &[usize]| -> Vec<PlateSample> {
        idx.iter().map(|&i| slots[i].take().expect("sample taken twice")).collect()
    };
    let train = take(&mut slots, &order[..n_train]);
    let val = take(&mut slots, &order[n_train..n_train + n_val]);
    let test = take(&mut slots, &order[n_train + n_val..]);
    Ok((train, val, test))
}
