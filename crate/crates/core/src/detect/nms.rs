//! Greedy non-maximum suppression.

use super::{iou, Detection};

/// Keep the highest-scored detection, suppress everything overlapping
/// it at or above the threshold, repeat. Stable by (score descending,
/// input order).
pub fn nms(detections: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    assert!(
        iou_threshold > 0.0 && iou_threshold <= 1.0,
        "iou threshold must be in (0, 1]"
    );
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.partial_cmp(&detections[a].score).unwrap());

    let mut suppressed = vec![false; detections.len()];
    let mut kept = Vec::new();
    for &i in &order {
        if suppressed[i] {
            continue;
        }
        kept.push(detections[i].clone());
        for &j in &order {
            if !suppressed[j] && j != i && iou(&detections[i].bbox, &detections[j].bbox) >= iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    kept
}
