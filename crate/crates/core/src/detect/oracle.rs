//! The pluggable detector interface and its two built-in
//! implementations: a ground-truth oracle (optionally jittered to
//! emulate an imperfect detector) and a loader for precomputed boxes,
//! so a real detection network can be slotted in without code changes.

use super::{BoundingBox, DetectError, Detection};
use crate::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

/// Everything a detector may consult for one image.
pub struct DetectionRequest<'a> {
    pub source_id: &'a str,
    /// Grayscale image, `[H, W, 1]`.
    pub image: &'a Tensor,
    /// Ground-truth boxes when the sample carries annotations.
    pub truth_boxes: Option<&'a [BoundingBox]>,
}

impl DetectionRequest<'_> {
    pub fn image_width(&self) -> u32 {
        self.image.shape()[1] as u32
    }

    pub fn image_height(&self) -> u32 {
        self.image.shape()[0] as u32
    }
}

pub trait Detector {
    fn detect(&self, request: &DetectionRequest) -> Result<Vec<Detection>, DetectError>;
}

/// Stands in for the detection network: returns the ground-truth boxes
/// with score 1.0, each edge optionally perturbed by a seeded uniform
/// offset of up to `jitter` times the box dimension.
///
/// With jitter j <= 0.25 the perturbed box keeps positive area and its
/// IoU with the original is at least (1 - 2j)^2.
pub struct OracleDetector {
    jitter: f64,
    seed: u64,
}

impl OracleDetector {
    pub fn exact() -> Self {
        Self { jitter: 0.0, seed: 0 }
    }

    pub fn jittered(jitter: f64, seed: u64) -> Self {
        assert!((0.0..=0.25).contains(&jitter), "jitter must be in [0, 0.25]");
        Self { jitter, seed }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl Detector for OracleDetector {
    fn detect(&self, request: &DetectionRequest) -> Result<Vec<Detection>, DetectError> {
        let truths = request
            .truth_boxes
            .ok_or_else(|| DetectError::MissingAnnotations(request.source_id.to_string()))?;
        let mut out = Vec::with_capacity(truths.len());
        for (i, truth) in truths.iter().enumerate() {
            let bbox = if self.jitter == 0.0 {
                *truth
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.seed ^ fnv1a(request.source_id.as_bytes()) ^ fnv1a(&i.to_le_bytes()),
                );
                let (w, h) = (truth.width(), truth.height());
                let mut shift = |dim: f64| rng.gen_range(-self.jitter..=self.jitter) * dim;
                BoundingBox::new(
                    truth.left + shift(w),
                    truth.top + shift(h),
                    truth.right + shift(w),
                    truth.bottom + shift(h),
                )?
            };
            out.push(Detection::new(bbox, 1.0)?);
        }
        Ok(out)
    }
}

/// Reads precomputed boxes from `<dir>/<source_id>.txt` in the
/// annotation text format.
pub struct ExternalBoxesDetector {
    dir: PathBuf,
    score: f64,
}

impl ExternalBoxesDetector {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), score: 1.0 }
    }
}

impl Detector for ExternalBoxesDetector {
    fn detect(&self, request: &DetectionRequest) -> Result<Vec<Detection>, DetectError> {
        let path = self.dir.join(format!("{}.txt", request.source_id));
        if !path.exists() {
            return Err(DetectError::MissingAnnotations(path.display().to_string()));
        }
        let boxes = read_annotation_file(&path, request.image_width(), request.image_height())?;
        boxes
            .into_iter()
            .map(|b| Detection::new(b, self.score))
            .collect()
    }
}

/// One annotation line: `class cx cy w h`, all but class normalized to
/// [0, 1] relative to the image dimensions.
pub fn parse_annotation_line(line: &str) -> Result<(u32, [f64; 4]), DetectError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(DetectError::MalformedAnnotation(format!(
            "expected 5 fields, got {}: {line:?}",
            fields.len()
        )));
    }
    let class: u32 = fields[0]
        .parse()
        .map_err(|_| DetectError::MalformedAnnotation(format!("bad class in {line:?}")))?;
    let mut vals = [0.0; 4];
    for (i, f) in fields[1..].iter().enumerate() {
        let v: f64 = f
            .parse()
            .map_err(|_| DetectError::MalformedAnnotation(format!("bad number in {line:?}")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(DetectError::MalformedAnnotation(format!(
                "field {v} outside [0, 1] in {line:?}"
            )));
        }
        vals[i] = v;
    }
    Ok((class, vals))
}

/// Parses a whole annotation file into pixel boxes.
pub fn read_annotation_file(path: &Path, img_w: u32, img_h: u32) -> Result<Vec<BoundingBox>, DetectError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DetectError::MissingAnnotations(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (_, [cx, cy, w, h]) = parse_annotation_line(line)?;
        out.push(BoundingBox::from_normalized(cx, cy, w, h, img_w, img_h)?);
    }
    Ok(out)
}
