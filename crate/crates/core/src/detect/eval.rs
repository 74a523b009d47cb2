//! Score-ordered one-to-one matching and average precision.

use super::{iou, BoundingBox, DetectError, Detection};

/// TP / FP / FN tallies for one evaluated image set.
///
/// Invariants: `tp + fn_count == truths` and `tp + fp == detections`
/// for every input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
}

impl MatchReport {
    pub fn merge(&mut self, other: &MatchReport) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_count += other.fn_count;
    }
}

/// Greedy per-image matching: detections in descending score order each
/// claim at most one unmatched truth with IoU >= threshold (highest IoU
/// wins, ties to the lowest truth index).
pub fn match_detections(
    detections: &[Detection],
    truths: &[BoundingBox],
    iou_threshold: f64,
) -> MatchReport {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.partial_cmp(&detections[a].score).unwrap());

    let mut truth_taken = vec![false; truths.len()];
    let mut tp = 0;
    for &d in &order {
        let mut best: Option<(usize, f64)> = None;
        for (t, truth) in truths.iter().enumerate() {
            if truth_taken[t] {
                continue;
            }
            let overlap = iou(&detections[d].bbox, truth);
            if overlap >= iou_threshold && best.map_or(true, |(_, b)| overlap > b) {
                best = Some((t, overlap));
            }
        }
        if let Some((t, _)) = best {
            truth_taken[t] = true;
            tp += 1;
        }
    }
    MatchReport {
        tp,
        fp: detections.len() - tp,
        fn_count: truths.len() - tp,
    }
}

/// All-point interpolated average precision over a set of images.
///
/// Detections across all images are swept in descending score order,
/// each matching unmatched truths of its own image under the
/// [`match_detections`] rule; precision is integrated over recall along
/// its upper envelope.
pub fn average_precision(
    per_image: &[(Vec<Detection>, Vec<BoundingBox>)],
    iou_threshold: f64,
) -> Result<f64, DetectError> {
    let total_truths: usize = per_image.iter().map(|(_, t)| t.len()).sum();
    if total_truths == 0 {
        return Err(DetectError::NoGroundTruth);
    }

    // (score, image, detection index), sorted by score desc then input order
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (img, (dets, _)) in per_image.iter().enumerate() {
        for (d, det) in dets.iter().enumerate() {
            all.push((det.score, img, d));
        }
    }
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut taken: Vec<Vec<bool>> = per_image.iter().map(|(_, t)| vec![false; t.len()]).collect();
    let mut tp_flags = Vec::with_capacity(all.len());
    for &(_, img, d) in &all {
        let det = &per_image[img].0[d];
        let truths = &per_image[img].1;
        let mut best: Option<(usize, f64)> = None;
        for (t, truth) in truths.iter().enumerate() {
            if taken[img][t] {
                continue;
            }
            let overlap = iou(&det.bbox, truth);
            if overlap >= iou_threshold && best.map_or(true, |(_, b)| overlap > b) {
                best = Some((t, overlap));
            }
        }
        match best {
            Some((t, _)) => {
                taken[img][t] = true;
                tp_flags.push(true);
            }
            None => tp_flags.push(false),
        }
    }

    // precision-recall points after each detection
    let mut tp = 0usize;
    let mut points = Vec::with_capacity(tp_flags.len());
    for (i, &is_tp) in tp_flags.iter().enumerate() {
        if is_tp {
            tp += 1;
        }
        let precision = tp as f64 / (i + 1) as f64;
        let recall = tp as f64 / total_truths as f64;
        points.push((recall, precision));
    }

    // integrate the precision envelope: at each recall, the max
    // precision at any recall >= it
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..points.len() {
        let (r, _) = points[i];
        if r > prev_recall {
            let envelope = points[i..]
                .iter()
                .map(|&(_, p)| p)
                .fold(0.0, f64::max);
            ap += (r - prev_recall) * envelope;
            prev_recall = r;
        }
    }
    Ok(ap)
}
