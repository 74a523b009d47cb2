//! Per-image prediction to stdout (and optionally a file): one
//! tab-separated line per reading.

use crate::pipeline::{recognize_image, PlateReading, RecognizeOptions};
use crate::CliError;
use lpr_core::data::load_grayscale_image;
use lpr_core::detect::{read_annotation_file, BoundingBox, DetectError, Detection, DetectionRequest, Detector};
use lpr_core::model::Crnn;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Boxes come from a sibling `.txt` annotation when present; otherwise
/// the whole image is treated as one plate crop.
struct SiblingOrWholeImage;

impl Detector for SiblingOrWholeImage {
    fn detect(&self, request: &DetectionRequest) -> Result<Vec<Detection>, DetectError> {
        let annot = Path::new(request.source_id).with_extension("txt");
        let bbox = if annot.exists() {
            return read_annotation_file(&annot, request.image_width(), request.image_height())?
                .into_iter()
                .map(|b| Detection::new(b, 1.0))
                .collect();
        } else {
            BoundingBox::new(0.0, 0.0, request.image_width() as f64, request.image_height() as f64)?
        };
        Ok(vec![Detection::new(bbox, 1.0)?])
    }
}

pub fn format_reading(path: &Path, reading: &PlateReading) -> String {
    format!(
        "{}\t{:.1},{:.1},{:.1},{:.1}\t{}\t{}\t{}",
        path.display(),
        reading.bbox.left,
        reading.bbox.top,
        reading.bbox.right,
        reading.bbox.bottom,
        reading.padded,
        reading.persian,
        reading.status.as_str()
    )
}

pub struct PredictOutcome {
    pub lines: Vec<String>,
    pub errors: Vec<String>,
    pub failed_files: usize,
    pub total_files: usize,
}

pub fn cmd_predict(
    ckpt: &Path,
    images: &[PathBuf],
    options: &RecognizeOptions,
    out: Option<&Path>,
) -> Result<PredictOutcome, CliError> {
    if images.is_empty() {
        return Err(CliError::Usage("predict needs at least one image path".into()));
    }
    let model = super::load_plate_checkpoint(ckpt)?;
    let detector = SiblingOrWholeImage;

    let mut lines = Vec::new();
    let mut errors = Vec::new();
    let mut failed_files = 0usize;
    for path in images {
        match predict_one(&model, &detector, path, options) {
            Ok((mut ok_lines, mut box_errors)) => {
                lines.append(&mut ok_lines);
                errors.append(&mut box_errors);
            }
            Err(e) => {
                failed_files += 1;
                errors.push(format!("{}: {e}", path.display()));
            }
        }
    }

    if let Some(out_path) = out {
        let mut file = std::fs::File::create(out_path)
            .map_err(|e| CliError::Data(format!("{}: {e}", out_path.display())))?;
        for line in &lines {
            writeln!(file, "{line}").map_err(|e| CliError::Data(e.to_string()))?;
        }
    }
    Ok(PredictOutcome {
        lines,
        errors,
        failed_files,
        total_files: images.len(),
    })
}

fn predict_one(
    model: &Crnn,
    detector: &dyn Detector,
    path: &Path,
    options: &RecognizeOptions,
) -> Result<(Vec<String>, Vec<String>), CliError> {
    let image = load_grayscale_image(path).map_err(|e| CliError::Data(e.to_string()))?;
    let source_id = path.to_string_lossy();
    let readings = recognize_image(model, detector, &source_id, &image, None, options)?;
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for r in readings {
        match r {
            Ok(reading) => lines.push(format_reading(path, &reading)),
            Err(e) => errors.push(format!("{}: {e}", path.display())),
        }
    }
    Ok((lines, errors))
}
