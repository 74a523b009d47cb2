//! Command implementations behind the CLI surface.

pub mod benchmark;
pub mod eval;
pub mod predict;
pub mod synth;
pub mod train;

use crate::CliError;
use lpr_core::data::{load_labeled_dir, PlateSample};
use lpr_core::model::{load_checkpoint, Crnn, ModelError, PLATE_CLASSES};
use std::path::Path;

pub(crate) fn load_plate_checkpoint(path: &Path) -> Result<Crnn, CliError> {
    let model = load_checkpoint(path).map_err(|e| match e {
        ModelError::NonFiniteLoss(_) => CliError::Numeric(e.to_string()),
        other => CliError::Data(other.to_string()),
    })?;
    if model.config().classes != PLATE_CLASSES {
        return Err(CliError::Data(format!(
            "alphabet mismatch: checkpoint has {} classes, the plate alphabet needs {PLATE_CLASSES}",
            model.config().classes
        )));
    }
    Ok(model)
}

pub(crate) fn load_dataset_dir(path: &Path) -> Result<Vec<PlateSample>, CliError> {
    let samples = load_labeled_dir(path).map_err(|e| CliError::Data(e.to_string()))?;
    if samples.is_empty() {
        return Err(CliError::Data(format!(
            "dataset empty: no images under {}",
            path.display()
        )));
    }
    Ok(samples)
}
