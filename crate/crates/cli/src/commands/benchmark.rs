//! Per-stage wall-clock benchmark over a dataset directory.

use crate::pipeline::crop_image;
use crate::report::{emit_kv, fmt_f64, mean, median};
use crate::CliError;
use lpr_core::ctc::greedy_decode;
use lpr_core::data::{resize_bilinear, PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH};
use lpr_core::detect::{BoundingBox, DetectionRequest, Detector, OracleDetector};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

/// One timing series per pipeline stage, in seconds per image.
#[derive(Debug, Clone, Default)]
pub struct StageTimes {
    pub detect: Vec<f64>,
    pub crop_resize: Vec<f64>,
    pub recognize: Vec<f64>,
    pub decode: Vec<f64>,
    pub end_to_end: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub images: usize,
    pub fps: f64,
    pub stages: StageTimes,
}

pub const STAGE_KEYS: [&str; 4] = ["detect", "crop_resize", "recognize", "decode"];

impl BenchmarkReport {
    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("images".into(), self.images.to_string());
        map.insert("fps".into(), fmt_f64(self.fps));
        let series = [
            ("detect", &self.stages.detect),
            ("crop_resize", &self.stages.crop_resize),
            ("recognize", &self.stages.recognize),
            ("decode", &self.stages.decode),
            ("end_to_end", &self.stages.end_to_end),
        ];
        for (name, values) in series {
            map.insert(format!("{name}_median_s"), fmt_f64(median(values)));
            map.insert(format!("{name}_mean_s"), fmt_f64(mean(values)));
        }
        map
    }

    pub fn render_kv(&self) -> String {
        emit_kv(&self.to_kv())
    }

    pub fn render_human(&self) -> String {
        let mut out = format!("benchmark over {} images ({:.1} fps)\n", self.images, self.fps);
        let series = [
            ("detect", &self.stages.detect),
            ("crop+resize", &self.stages.crop_resize),
            ("recognize", &self.stages.recognize),
            ("decode", &self.stages.decode),
            ("end-to-end", &self.stages.end_to_end),
        ];
        for (name, values) in series {
            out.push_str(&format!(
                "  {name:<12} median {:8.2} ms   mean {:8.2} ms\n",
                median(values) * 1e3,
                mean(values) * 1e3
            ));
        }
        out
    }
}

pub fn cmd_benchmark(ckpt: &Path, data: &Path) -> Result<BenchmarkReport, CliError> {
    let model = super::load_plate_checkpoint(ckpt)?;
    let samples = super::load_dataset_dir(data)?;
    if samples.len() < 30 {
        return Err(CliError::Data(format!(
            "too few samples for stable medians: {} < 30",
            samples.len()
        )));
    }

    let detector = OracleDetector::exact();
    let alphabet = model.alphabet();
    let mut stages = StageTimes::default();
    let run_started = Instant::now();

    for s in &samples {
        let whole_image;
        let truths: &[BoundingBox] = match &s.truth_boxes {
            Some(boxes) => boxes,
            None => {
                whole_image = [BoundingBox::new(
                    0.0,
                    0.0,
                    s.image.shape()[1] as f64,
                    s.image.shape()[0] as f64,
                )
                .expect("image box")];
                &whole_image
            }
        };

        let image_started = Instant::now();
        let t = Instant::now();
        let detections = detector
            .detect(&DetectionRequest {
                source_id: &s.source_id,
                image: &s.image,
                truth_boxes: Some(truths),
            })
            .map_err(|e| CliError::Data(e.to_string()))?;
        stages.detect.push(t.elapsed().as_secs_f64());

        let mut crop_s = 0.0;
        let mut rec_s = 0.0;
        let mut dec_s = 0.0;
        for det in &detections {
            let t = Instant::now();
            let crop = crop_image(&s.image, &det.bbox, 0.0)?;
            let input = resize_bilinear(&crop, PLATE_IMAGE_HEIGHT, PLATE_IMAGE_WIDTH);
            crop_s += t.elapsed().as_secs_f64();

            let t = Instant::now();
            let probs = model.infer(&input).map_err(|e| CliError::Numeric(e.to_string()))?;
            rec_s += t.elapsed().as_secs_f64();

            let t = Instant::now();
            let _ = greedy_decode(&probs, &alphabet);
            dec_s += t.elapsed().as_secs_f64();
        }
        stages.crop_resize.push(crop_s);
        stages.recognize.push(rec_s);
        stages.decode.push(dec_s);
        stages.end_to_end.push(image_started.elapsed().as_secs_f64());
    }

    let total = run_started.elapsed().as_secs_f64();
    Ok(BenchmarkReport {
        images: samples.len(),
        fps: samples.len() as f64 / total,
        stages,
    })
}
