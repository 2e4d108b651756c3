use serde::Serialize;

use super::matching::{compare_predictions, match_predictions, processing_order};
use super::EvalError;
use crate::annotation::NormalizedBox;
use crate::detect::Detection;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub const IOU_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Number of recall sample points for interpolated AP (0.00..=1.00).
pub const RECALL_POINTS: usize = 101;

/// Predictions and ground truth for one image.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImageEval {
    pub predictions: Vec<Detection>,
    pub ground_truth: Vec<NormalizedBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub confidence: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Precision/recall after each prediction of a descending-confidence sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PrCurve {
    pub gt_count: usize,
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    /// 101-point interpolated AP: the mean over recall levels
    /// `r = 0.00, 0.01, ..., 1.00` of the best precision reached at recall
    /// `>= r`, counting 0 where that recall is never reached.
    pub fn interpolated_ap(&self) -> f64 {
        if self.points.is_empty() || self.gt_count == 0 {
            return 0.0;
        }
        let mut envelope: Vec<f64> = self.points.iter().map(|p| p.precision).collect();
        for i in (0..envelope.len() - 1).rev() {
            envelope[i] = envelope[i].max(envelope[i + 1]);
        }
        let total: f64 = (0..RECALL_POINTS)
            .map(|k| {
                let r = k as f64 / 100.0;
                let first = self.points.partition_point(|p| p.recall < r);
                envelope.get(first).copied().unwrap_or(0.0)
            })
            .sum();
        total / RECALL_POINTS as f64
    }
}

fn in_class(class: Option<u32>, id: u32) -> bool {
    class.is_none_or(|c| c == id)
}

/// Builds the PR curve for `class` (all classes pooled when `None`).
///
/// Matching runs per image; the sweep then walks every prediction of the
/// class across the dataset in the same order matching uses, with image
/// index as the final tie-break.
pub fn pr_curve(images: &[ImageEval], class: Option<u32>, iou_threshold: f64) -> PrCurve {
    struct Scored<'a> {
        det: &'a Detection,
        best_iou: f64,
        image: usize,
        rank: usize,
        tp: bool,
    }
    let mut scored: Vec<Scored> = Vec::new();
    let mut gt_count = 0;
    for (image, im) in images.iter().enumerate() {
        gt_count += im.ground_truth.iter().filter(|g| in_class(class, g.class_id())).count();
        let outcome = match_predictions(&im.predictions, &im.ground_truth, iou_threshold);
        for (rank, (i, best_iou)) in processing_order(&im.predictions, &im.ground_truth).into_iter().enumerate() {
            let det = &im.predictions[i];
            if in_class(class, det.class_id()) {
                scored.push(Scored { det, best_iou, image, rank, tp: outcome.prediction_matches[i].is_some() });
            }
        }
    }
    scored.sort_by(|a, b| {
        compare_predictions((a.det, a.best_iou), (b.det, b.best_iou))
            .then(a.image.cmp(&b.image))
            .then(a.rank.cmp(&b.rank))
    });

    let (mut tp, mut fp) = (0usize, 0usize);
    let points = scored
        .iter()
        .map(|s| {
            if s.tp {
                tp += 1;
            } else {
                fp += 1;
            }
            PrPoint {
                confidence: s.det.confidence,
                recall: if gt_count == 0 { 0.0 } else { tp as f64 / gt_count as f64 },
                precision: tp as f64 / (tp + fp) as f64,
            }
        })
        .collect();
    PrCurve { gt_count, points }
}

/// AP for one class at one IoU threshold; `None` when the class has no
/// ground truth in `images`.
pub fn average_precision(images: &[ImageEval], class: Option<u32>, iou_threshold: f64) -> Option<f64> {
    let curve = pr_curve(images, class, iou_threshold);
    (curve.gt_count > 0).then(|| curve.interpolated_ap())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAp {
    pub class_id: u32,
    pub ap: [f64; 10],
    pub map_50_95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSummary {
    pub thresholds: [f64; 10],
    /// Classes that have ground truth, in id order.
    pub classes: Vec<ClassAp>,
    /// Per threshold, the mean AP over `classes`.
    pub ap: [f64; 10],
    pub map_50_95: f64,
}

/// mAP@50-95: per-class AP at each of the ten thresholds, averaged over
/// classes per threshold, then over thresholds.
pub fn map_50_95(images: &[ImageEval]) -> Result<MapSummary, EvalError> {
    let mut class_ids: Vec<u32> = images.iter().flat_map(|im| im.ground_truth.iter().map(|g| g.class_id())).collect();
    class_ids.sort_unstable();
    class_ids.dedup();
    if class_ids.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let classes: Vec<ClassAp> = class_ids
        .into_iter()
        .map(|class_id| {
            let ap = IOU_THRESHOLDS.map(|t| average_precision(images, Some(class_id), t).unwrap_or(0.0));
            ClassAp { class_id, ap, map_50_95: ap.iter().sum::<f64>() / ap.len() as f64 }
        })
        .collect();
    let mut ap = [0.0; 10];
    for (k, slot) in ap.iter_mut().enumerate() {
        *slot = classes.iter().map(|c| c.ap[k]).sum::<f64>() / classes.len() as f64;
    }
    let map = ap.iter().sum::<f64>() / ap.len() as f64;
    Ok(MapSummary { thresholds: IOU_THRESHOLDS, classes, ap, map_50_95: map })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(cx: f64, cy: f64, w: f64, h: f64) -> NormalizedBox {
        NormalizedBox::new(0, cx, cy, w, h).unwrap()
    }

    #[test]
    fn thresholds_are_fifty_to_ninety_five() {
        assert_eq!(IOU_THRESHOLDS.len(), 10);
        for (k, t) in IOU_THRESHOLDS.iter().enumerate() {
            assert!((t - (0.50 + 0.05 * k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_single_prediction() {
        let g = bx(0.5, 0.5, 0.2, 0.2);
        let im = ImageEval { predictions: vec![Detection::new(g, 0.9)], ground_truth: vec![g] };
        assert_eq!(average_precision(&[im], None, 0.5), Some(1.0));
    }

    #[test]
    fn no_predictions_is_zero() {
        let im = ImageEval { predictions: vec![], ground_truth: vec![bx(0.5, 0.5, 0.2, 0.2)] };
        assert_eq!(average_precision(&[im.clone()], None, 0.5), Some(0.0));
        assert_eq!(average_precision(&[ImageEval::default()], None, 0.5), None);
    }

    #[test]
    fn tp_then_fp_on_two_ground_truths() {
        let g1 = bx(0.2, 0.2, 0.2, 0.2);
        let g2 = bx(0.8, 0.8, 0.2, 0.2);
        let im = ImageEval {
            predictions: vec![Detection::new(g1, 0.9), Detection::new(bx(0.5, 0.5, 0.1, 0.1), 0.8)],
            ground_truth: vec![g1, g2],
        };
        let ap = average_precision(&[im], None, 0.5).unwrap();
        assert!((ap - 51.0 / 101.0).abs() < 1e-12, "{ap}");
    }

    #[test]
    fn iou_point_seven_gives_half_map() {
        // GT x [0.2, 0.6]; prediction x [0.2, 0.48] -> IoU 0.7.
        let g = NormalizedBox::from_corners(0, 0.2, 0.2, 0.6, 0.6).unwrap();
        let p = NormalizedBox::from_corners(0, 0.2, 0.2, 0.48, 0.6).unwrap();
        let im = ImageEval { predictions: vec![Detection::new(p, 0.9)], ground_truth: vec![g] };
        let s = map_50_95(&[im]).unwrap();
        assert_eq!(s.ap, [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((s.map_50_95 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        let im = ImageEval { predictions: vec![Detection::new(bx(0.5, 0.5, 0.1, 0.1), 0.5)], ground_truth: vec![] };
        assert!(matches!(map_50_95(&[im]), Err(EvalError::EmptyGroundTruth)));
    }

    #[test]
    fn multi_class_averages_classes_first() {
        let a = bx(0.3, 0.3, 0.2, 0.2);
        let b = bx(0.7, 0.7, 0.2, 0.2).with_class(1);
        // Class 0 perfect, class 1 missed.
        let im = ImageEval { predictions: vec![Detection::new(a, 0.9)], ground_truth: vec![a, b] };
        let s = map_50_95(&[im]).unwrap();
        assert_eq!(s.classes.len(), 2);
        assert_eq!(s.classes[0].map_50_95, 1.0);
        assert_eq!(s.classes[1].map_50_95, 0.0);
        assert!((s.map_50_95 - 0.5).abs() < 1e-12);
    }
}
