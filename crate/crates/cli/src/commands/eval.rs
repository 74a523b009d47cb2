//! Evaluation over a named split: sequence and character accuracy, mean
//! loss, and detection metrics where ground-truth boxes exist.

use crate::pipeline::pad_reading;
use crate::report::{char_accuracy, emit_kv, fmt_f64};
use crate::CliError;
use lpr_core::ctc::greedy_decode;
use lpr_core::data::{decode_label, split, PlateSample, SplitSpec};
use lpr_core::detect::{
    average_precision, match_detections, DetectionRequest, Detector, MatchReport, OracleDetector,
};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "train" => Ok(Self::Train),
            "val" => Ok(Self::Val),
            "test" => Ok(Self::Test),
            other => Err(CliError::Usage(format!(
                "split must be train|val|test, got {other:?}"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalRow {
    pub source_id: String,
    pub predicted: String,
    pub truth: String,
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub split: &'static str,
    pub samples: usize,
    pub seq_accuracy: f64,
    pub char_accuracy: f64,
    pub mean_loss: f64,
    /// Match tallies, average precision, and the number of annotated
    /// images they cover.
    pub detection: Option<(MatchReport, f64, usize)>,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn to_kv(&self, include_rows: bool) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("split".into(), self.split.to_string());
        map.insert("samples".into(), self.samples.to_string());
        map.insert("seq_accuracy".into(), fmt_f64(self.seq_accuracy));
        map.insert("char_accuracy".into(), fmt_f64(self.char_accuracy));
        map.insert("mean_loss".into(), fmt_f64(self.mean_loss));
        if let Some((m, ap, images)) = &self.detection {
            map.insert("det_tp".into(), m.tp.to_string());
            map.insert("det_fp".into(), m.fp.to_string());
            map.insert("det_fn".into(), m.fn_count.to_string());
            map.insert("det_ap".into(), fmt_f64(*ap));
            map.insert("det_images".into(), images.to_string());
        }
        if include_rows {
            for (i, row) in self.rows.iter().enumerate() {
                map.insert(
                    format!("row.{i}"),
                    format!("{},{},{},{}", row.source_id, row.predicted, row.truth, row.exact),
                );
            }
        }
        map
    }

    pub fn render_kv(&self, include_rows: bool) -> String {
        emit_kv(&self.to_kv(include_rows))
    }

    pub fn render_human(&self) -> String {
        let mut out = format!(
            "{} split: {} samples\n  sequence accuracy {:.2}%\n  character accuracy {:.2}%\n  mean ctc loss {:.4}\n",
            self.split,
            self.samples,
            self.seq_accuracy * 100.0,
            self.char_accuracy * 100.0,
            self.mean_loss
        );
        if let Some((m, ap, images)) = &self.detection {
            out.push_str(&format!(
                "  detection over {images} annotated images: TP {} FP {} FN {}  AP {:.2}%\n",
                m.tp,
                m.fp,
                m.fn_count,
                ap * 100.0
            ));
        }
        out
    }
}

pub struct EvalOptions {
    pub split: SplitName,
    pub seed: u64,
    /// Oracle-detector jitter for the detection metrics.
    pub jitter: f64,
    /// Detections below this confidence are dropped before matching.
    pub score_threshold: f64,
    pub rows: bool,
}

pub fn cmd_eval(ckpt: &Path, data: &Path, options: &EvalOptions) -> Result<EvalReport, CliError> {
    let model = super::load_plate_checkpoint(ckpt)?;
    let samples = super::load_dataset_dir(data)?;
    let (train, val, test) = split(samples, &SplitSpec::eighty_ten_ten(options.seed))
        .map_err(|e| CliError::Data(e.to_string()))?;
    let chosen: Vec<PlateSample> = match options.split {
        SplitName::Train => train,
        SplitName::Val => val,
        SplitName::Test => test,
    };
    if chosen.is_empty() {
        return Err(CliError::Data(format!(
            "dataset empty: the {} split has no samples",
            options.split.as_str()
        )));
    }

    let alphabet = model.alphabet();
    let mut rows = Vec::with_capacity(chosen.len());
    let mut seq_hits = 0usize;
    let mut char_sum = 0.0;
    let mut loss_sum = 0.0;
    for s in &chosen {
        let probs = model.infer(&s.image).map_err(|e| CliError::Numeric(e.to_string()))?;
        let decoded = greedy_decode(&probs, &alphabet);
        let (pred, _) = pad_reading(&decode_label(&decoded));
        let (truth, _) = pad_reading(&decode_label(&s.label));
        let exact = pred == truth;
        seq_hits += usize::from(exact);
        char_sum += char_accuracy(&pred, &truth);
        loss_sum += model
            .evaluate_loss(&s.image, &s.label)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        rows.push(EvalRow {
            source_id: s.source_id.clone(),
            predicted: pred,
            truth,
            exact,
        });
    }

    // detection metrics over the annotated subset, via the (optionally
    // jittered) oracle detector
    let detector = if options.jitter > 0.0 {
        OracleDetector::jittered(options.jitter, options.seed)
    } else {
        OracleDetector::exact()
    };
    let mut annotated = 0usize;
    let mut match_total = MatchReport::default();
    let mut per_image = Vec::new();
    for s in &chosen {
        let Some(truths) = &s.truth_boxes else { continue };
        annotated += 1;
        let request = DetectionRequest {
            source_id: &s.source_id,
            image: &s.image,
            truth_boxes: Some(truths),
        };
        let mut dets = detector
            .detect(&request)
            .map_err(|e| CliError::Data(e.to_string()))?;
        dets.retain(|d| d.score >= options.score_threshold);
        match_total.merge(&match_detections(&dets, truths, 0.5));
        per_image.push((dets, truths.clone()));
    }
    let detection = if annotated > 0 {
        let ap = average_precision(&per_image, 0.5).map_err(|e| CliError::Data(e.to_string()))?;
        Some((match_total, ap, annotated))
    } else {
        None
    };

    Ok(EvalReport {
        split: options.split.as_str(),
        samples: chosen.len(),
        seq_accuracy: seq_hits as f64 / chosen.len() as f64,
        char_accuracy: char_sum / chosen.len() as f64,
        mean_loss: loss_sum / chosen.len() as f64,
        detection,
        rows,
    })
}
