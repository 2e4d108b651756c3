//! Detection evaluation: greedy matching, 101-point interpolated AP,
//! mAP@50-95, precision, recall and F1.

mod ap;
mod matching;
mod report;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::annotation::{parse_label_file, LabelError, LabelErrorKind};
use crate::detect::{parse_prediction_file, Detection};

pub use ap::{average_precision, map_50_95, pr_curve, ClassAp, ImageEval, MapSummary, PrCurve, PrPoint, IOU_THRESHOLDS, RECALL_POINTS};
pub use matching::{match_predictions, MatchOutcome, IOU_SLACK};
pub use report::{evaluate, f1, ClassMetrics, EvalReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth is empty; metrics are undefined")]
    EmptyGroundTruth,
    #[error("confidence threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Label { path: PathBuf, source: LabelError },
}

fn label_stems(dir: &Path) -> Result<BTreeSet<String>, EvalError> {
    let entries = fs::read_dir(dir).map_err(|source| EvalError::Io { path: dir.to_path_buf(), source })?;
    Ok(entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
        .collect())
}

fn read(path: &Path) -> Result<String, EvalError> {
    fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })
}

/// Pairs prediction files (`class cx cy w h conf`) with ground-truth label
/// files by stem. Prediction files in plain label format are read with
/// confidence 1. A stem present on only one side counts as an image with
/// no predictions or no ground truth. Images are ordered by stem.
pub fn load_eval_dirs(preds_dir: &Path, gt_dir: &Path, class_count: usize) -> Result<Vec<(String, ImageEval)>, EvalError> {
    let stems: BTreeSet<String> = label_stems(preds_dir)?.into_iter().chain(label_stems(gt_dir)?).collect();
    stems
        .into_iter()
        .map(|stem| {
            let pred_path = preds_dir.join(format!("{stem}.txt"));
            let gt_path = gt_dir.join(format!("{stem}.txt"));
            let predictions = if pred_path.is_file() {
                let text = read(&pred_path)?;
                match parse_prediction_file(&text, class_count) {
                    Ok(p) => p,
                    // A plain label file has no confidence column; every box counts as certain.
                    Err(e) if e.kind == (LabelErrorKind::FieldCount { expected: 6, found: 5 }) => {
                        parse_label_file(&text, class_count)
                            .map_err(|source| EvalError::Label { path: pred_path.clone(), source })?
                            .into_iter()
                            .map(|b| Detection::new(b, 1.0))
                            .collect()
                    }
                    Err(source) => return Err(EvalError::Label { path: pred_path.clone(), source }),
                }
            } else {
                Vec::new()
            };
            let ground_truth = if gt_path.is_file() {
                parse_label_file(&read(&gt_path)?, class_count)
                    .map_err(|source| EvalError::Label { path: gt_path.clone(), source })?
            } else {
                Vec::new()
            };
            Ok((stem, ImageEval { predictions, ground_truth }))
        })
        .collect()
}
