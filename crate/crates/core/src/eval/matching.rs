use std::cmp::Ordering;

use crate::annotation::NormalizedBox;
use crate::detect::{iou, Detection};

/// Slack on the inclusive `iou >= threshold` test, so a pair whose IoU is
/// exactly on a threshold in real arithmetic is not lost to rounding.
pub const IOU_SLACK: f64 = 1e-9;

pub(crate) fn passes(iou: f64, threshold: f64) -> bool {
    iou + IOU_SLACK >= threshold
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    /// Per prediction, in input order: the matched ground-truth index if TP.
    pub prediction_matches: Vec<Option<usize>>,
    /// Per ground truth, in input order.
    pub gt_matched: Vec<bool>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Best same-class IoU of a prediction against any ground truth.
pub(crate) fn best_iou(pred: &Detection, gts: &[NormalizedBox]) -> f64 {
    gts.iter()
        .filter(|g| g.class_id() == pred.class_id())
        .map(|g| iou(&pred.bbox, g))
        .fold(0.0, f64::max)
}

/// Processing order: confidence descending, best IoU descending, then the
/// box itself, so equal-confidence predictions are ranked independently of
/// where they sit in the input.
pub(crate) fn compare_predictions(a: (&Detection, f64), b: (&Detection, f64)) -> Ordering {
    let (da, ia) = a;
    let (db, ib) = b;
    db.confidence
        .total_cmp(&da.confidence)
        .then(ib.total_cmp(&ia))
        .then(da.class_id().cmp(&db.class_id()))
        .then(da.bbox.cx().total_cmp(&db.bbox.cx()))
        .then(da.bbox.cy().total_cmp(&db.bbox.cy()))
        .then(da.bbox.w().total_cmp(&db.bbox.w()))
        .then(da.bbox.h().total_cmp(&db.bbox.h()))
}

pub(crate) fn processing_order(preds: &[Detection], gts: &[NormalizedBox]) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = preds.iter().enumerate().map(|(i, p)| (i, best_iou(p, gts))).collect();
    order.sort_by(|&(i, ii), &(j, ij)| compare_predictions((&preds[i], ii), (&preds[j], ij)).then(i.cmp(&j)));
    order
}

/// Greedy confidence-ordered matching on one image.
///
/// Each prediction takes the unmatched same-class ground truth with the
/// highest IoU at or above `iou_threshold` (lowest index on ties); a
/// prediction with no such ground truth is a false positive.
pub fn match_predictions(preds: &[Detection], gts: &[NormalizedBox], iou_threshold: f64) -> MatchOutcome {
    let mut prediction_matches = vec![None; preds.len()];
    let mut gt_matched = vec![false; gts.len()];
    for (i, _) in processing_order(preds, gts) {
        let p = &preds[i];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if gt_matched[g] || gt.class_id() != p.class_id() {
                continue;
            }
            let v = iou(&p.bbox, gt);
            if passes(v, iou_threshold) && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, _)) = best {
            gt_matched[g] = true;
            prediction_matches[i] = Some(g);
        }
    }
    let tp = prediction_matches.iter().filter(|m| m.is_some()).count();
    MatchOutcome { fp: preds.len() - tp, fn_: gts.len() - tp, tp, prediction_matches, gt_matched }
}
