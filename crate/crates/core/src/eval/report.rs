use std::fmt::Write as _;

use serde::Serialize;

use super::ap::{map_50_95, pr_curve, ImageEval, PrCurve, IOU_THRESHOLDS};
use super::matching::match_predictions;
use super::EvalError;
use crate::annotation::ClassMap;
use crate::detect::filter_confidence;

/// `2PR / (P + R)`, or 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    /// `None` for the aggregate row.
    pub class_id: Option<u32>,
    pub name: String,
    pub gt_count: usize,
    pub ap: [f64; 10],
    pub map_50_95: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub iou_thresholds: [f64; 10],
    /// Confidence cut used for the single precision/recall/F1 point.
    pub confidence_threshold: f64,
    pub classes: Vec<ClassMetrics>,
    pub aggregate: ClassMetrics,
    /// Per-class PR curves at IoU 0.50.
    #[serde(skip)]
    pub curves: Vec<(u32, PrCurve)>,
}

/// Full evaluation of `images`.
///
/// Precision and recall are taken at IoU 0.50 over predictions with
/// `confidence >= confidence_threshold`. The aggregate row averages the
/// per-class values over classes that have ground truth; its F1 is computed
/// from the averaged precision and recall.
pub fn evaluate(images: &[ImageEval], class_map: &ClassMap, confidence_threshold: f64) -> Result<EvalReport, EvalError> {
    if !(0.0..=1.0).contains(&confidence_threshold) {
        return Err(EvalError::InvalidThreshold(confidence_threshold));
    }
    let summary = map_50_95(images)?;
    let cut: Vec<ImageEval> = images
        .iter()
        .map(|im| ImageEval {
            predictions: filter_confidence(&im.predictions, confidence_threshold),
            ground_truth: im.ground_truth.clone(),
        })
        .collect();
    let outcomes: Vec<_> = cut.iter().map(|im| (im, match_predictions(&im.predictions, &im.ground_truth, 0.5))).collect();

    let mut classes = Vec::with_capacity(summary.classes.len());
    let mut curves = Vec::with_capacity(summary.classes.len());
    for c in &summary.classes {
        let (mut tp, mut fp, mut gt) = (0usize, 0usize, 0usize);
        for (im, m) in &outcomes {
            for (p, matched) in im.predictions.iter().zip(&m.prediction_matches) {
                if p.class_id() == c.class_id {
                    if matched.is_some() {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            gt += im.ground_truth.iter().filter(|g| g.class_id() == c.class_id).count();
        }
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = tp as f64 / gt as f64;
        classes.push(ClassMetrics {
            class_id: Some(c.class_id),
            name: class_map.name(c.class_id).map_or_else(|| c.class_id.to_string(), str::to_string),
            gt_count: gt,
            ap: c.ap,
            map_50_95: c.map_50_95,
            precision,
            recall,
            f1: f1(precision, recall),
        });
        curves.push((c.class_id, pr_curve(images, Some(c.class_id), 0.5)));
    }
    let n = classes.len() as f64;
    let precision = classes.iter().map(|c| c.precision).sum::<f64>() / n;
    let recall = classes.iter().map(|c| c.recall).sum::<f64>() / n;
    let aggregate = ClassMetrics {
        class_id: None,
        name: "all".into(),
        gt_count: classes.iter().map(|c| c.gt_count).sum(),
        ap: summary.ap,
        map_50_95: summary.map_50_95,
        precision,
        recall,
        f1: f1(precision, recall),
    };
    Ok(EvalReport { iou_thresholds: IOU_THRESHOLDS, confidence_threshold, classes, aggregate, curves })
}

impl EvalReport {
    /// `key = value` lines, one metric per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "confidence_threshold = {:.6}", self.confidence_threshold);
        let _ = writeln!(out, "classes = {}", self.classes.len());
        let mut block = |prefix: &str, m: &ClassMetrics| {
            let _ = writeln!(out, "{prefix}gt_count = {}", m.gt_count);
            let _ = writeln!(out, "{prefix}map_50_95 = {:.6}", m.map_50_95);
            let _ = writeln!(out, "{prefix}precision = {:.6}", m.precision);
            let _ = writeln!(out, "{prefix}recall = {:.6}", m.recall);
            let _ = writeln!(out, "{prefix}f1 = {:.6}", m.f1);
            for (t, ap) in self.iou_thresholds.iter().zip(&m.ap) {
                let _ = writeln!(out, "{prefix}ap@{t:.2} = {ap:.6}");
            }
        };
        block("", &self.aggregate);
        for c in &self.classes {
            block(&format!("class.{}.", c.name), c);
        }
        out
    }

    /// CSV rows `class,iou_thresh,ap`, aggregate rows under class `all`.
    pub fn ap_csv(&self) -> String {
        let mut out = String::from("class,iou_thresh,ap\n");
        for m in std::iter::once(&self.aggregate).chain(&self.classes) {
            for (t, ap) in self.iou_thresholds.iter().zip(&m.ap) {
                let _ = writeln!(out, "{},{t:.2},{ap:.6}", m.name);
            }
        }
        out
    }

    /// CSV rows `class,confidence,recall,precision` for the IoU 0.50 curves.
    pub fn pr_csv(&self) -> String {
        let mut out = String::from("class,confidence,recall,precision\n");
        for (class_id, curve) in &self.curves {
            let name = self.classes.iter().find(|c| c.class_id == Some(*class_id)).map_or("", |c| c.name.as_str());
            for p in &curve.points {
                let _ = writeln!(out, "{name},{:.6},{:.6},{:.6}", p.confidence, p.recall, p.precision);
            }
        }
        out
    }
}
