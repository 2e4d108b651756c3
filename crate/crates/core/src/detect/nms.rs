use std::cmp::Ordering;

use super::detection::{iou, Detection};

/// Confidence descending, then smaller `cx`, then smaller `cy`.
pub(crate) fn rank(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.bbox.cx().total_cmp(&b.bbox.cx()))
        .then(a.bbox.cy().total_cmp(&b.bbox.cy()))
}

/// Greedy class-agnostic non-maximum suppression.
///
/// Walks the detections in rank order, keeping one unless it overlaps an
/// already kept detection with `iou >= iou_threshold`. The result is in
/// rank order.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut sorted = dets.to_vec();
    sorted.sort_by(rank);
    let mut kept: Vec<Detection> = Vec::with_capacity(sorted.len());
    for d in sorted {
        if kept.iter().all(|k| iou(&k.bbox, &d.bbox) < iou_threshold) {
            kept.push(d);
        }
    }
    kept
}

/// Runs [`nms`] separately for each class id and merges the survivors in
/// rank order.
pub fn nms_per_class(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut classes: Vec<u32> = dets.iter().map(Detection::class_id).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut kept: Vec<Detection> = classes
        .into_iter()
        .flat_map(|c| {
            let group: Vec<Detection> = dets.iter().filter(|d| d.class_id() == c).copied().collect();
            nms(&group, iou_threshold)
        })
        .collect();
    kept.sort_by(rank);
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::NormalizedBox;

    fn det(class: u32, cx: f64, cy: f64, w: f64, conf: f64) -> Detection {
        Detection::new(NormalizedBox::new(class, cx, cy, w, w).unwrap(), conf)
    }

    #[test]
    fn colocated_boxes_keep_best() {
        let d = [det(0, 0.5, 0.5, 0.2, 0.8), det(0, 0.5, 0.5, 0.2, 0.9), det(0, 0.51, 0.5, 0.2, 0.7)];
        let kept = nms(&d, 0.5);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].confidence, 0.9);
    }

    #[test]
    fn disjoint_boxes_all_kept_in_rank_order() {
        let d = [det(0, 0.1, 0.1, 0.1, 0.3), det(0, 0.5, 0.5, 0.1, 0.9), det(0, 0.8, 0.8, 0.1, 0.6)];
        let confs: Vec<f64> = nms(&d, 0.5).iter().map(|d| d.confidence).collect();
        assert_eq!(confs, [0.9, 0.6, 0.3]);
    }

    #[test]
    fn chain_keeps_ends() {
        // A-B and B-C overlap (iou 1/3), A-C only touch.
        let a = det(0, 0.30, 0.5, 0.2, 0.9);
        let b = det(0, 0.40, 0.5, 0.2, 0.8);
        let c = det(0, 0.50, 0.5, 0.2, 0.7);
        assert!(iou(&a.bbox, &b.bbox) >= 0.3 && iou(&b.bbox, &c.bbox) >= 0.3);
        assert!(iou(&a.bbox, &c.bbox) < 1e-12);
        assert_eq!(nms(&[c, a, b], 0.3), vec![a, c]);
    }

    #[test]
    fn ties_broken_by_position() {
        let left = det(0, 0.40, 0.5, 0.2, 0.5);
        let right = det(0, 0.45, 0.5, 0.2, 0.5);
        assert_eq!(nms(&[right, left], 0.3), vec![left]);
    }

    #[test]
    fn per_class_only_suppresses_within_class() {
        let d = [det(0, 0.5, 0.5, 0.2, 0.9), det(1, 0.5, 0.5, 0.2, 0.8), det(0, 0.5, 0.5, 0.2, 0.7)];
        let kept = nms_per_class(&d, 0.5);
        assert_eq!(kept.iter().map(|d| d.class_id()).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(nms(&d, 0.5).len(), 1);
    }
}
