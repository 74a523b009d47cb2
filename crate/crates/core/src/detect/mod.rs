//! Detection-side evaluation: IoU at a threshold, greedy one-to-one
//! matching with TP/FP/FN tallies, non-maximum suppression, average
//! precision, and a pluggable detector interface whose oracle
//! implementation reads ground-truth boxes (optionally jittered) in
//! place of a real detection network.

mod eval;
mod nms;
mod oracle;

pub use eval::{average_precision, match_detections, MatchReport};
pub use nms::nms;
pub use oracle::{
    parse_annotation_line, read_annotation_file, DetectionRequest, Detector,
    ExternalBoxesDetector, OracleDetector,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("no ground truth boxes")]
    NoGroundTruth,
    #[error("sample has no annotations: {0}")]
    MissingAnnotations(String),
    #[error("malformed annotation: {0}")]
    MalformedAnnotation(String),
}

/// Axis-aligned pixel rectangle with `right > left`, `bottom > top`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Result<Self, DetectError> {
        if !(right > left && bottom > top) || !(left.is_finite() && top.is_finite() && right.is_finite() && bottom.is_finite()) {
            return Err(DetectError::InvalidBox(format!(
                "({left}, {top}, {right}, {bottom})"
            )));
        }
        Ok(Self { left, top, right, bottom })
    }

    /// From normalized YOLO-style center/size relative to image dims,
    /// rounded to the nearest integer pixel and clamped to the image.
    pub fn from_normalized(cx: f64, cy: f64, w: f64, h: f64, img_w: u32, img_h: u32) -> Result<Self, DetectError> {
        let iw = img_w as f64;
        let ih = img_h as f64;
        let left = ((cx - w / 2.0) * iw).round().clamp(0.0, iw);
        let right = ((cx + w / 2.0) * iw).round().clamp(0.0, iw);
        let top = ((cy - h / 2.0) * ih).round().clamp(0.0, ih);
        let bottom = ((cy + h / 2.0) * ih).round().clamp(0.0, ih);
        Self::new(left, top, right, bottom)
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Intersection over union; 0 for disjoint boxes, 1 iff identical.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.right.min(b.right) - a.left.max(b.left)).max(0.0);
    let iy = (a.bottom.min(b.bottom) - a.top.max(b.top)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    inter / union
}

/// The paper's single detection class.
pub const PLATE_CLASS: &str = "License Plate";

/// A detector output: box, confidence, and the fixed class name.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub class: &'static str,
    pub bbox: BoundingBox,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, score: f64) -> Result<Self, DetectError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(DetectError::InvalidBox(format!("score {score} outside [0, 1]")));
        }
        Ok(Self { class: PLATE_CLASS, bbox, score })
    }
}
