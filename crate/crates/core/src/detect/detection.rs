use serde::{Deserialize, Serialize};

use crate::annotation::{parse_box_fields, parse_number, records, write_box, LabelError, LabelErrorKind, NormalizedBox};

/// A predicted box with its confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: NormalizedBox,
    pub confidence: f64,
}

impl Detection {
    /// Clamps nothing: a confidence outside `[0, 1]` is a caller bug.
    pub fn new(bbox: NormalizedBox, confidence: f64) -> Self {
        assert!((0.0..=1.0).contains(&confidence), "confidence {confidence} outside [0, 1]");
        Self { bbox, confidence }
    }

    pub fn class_id(&self) -> u32 {
        self.bbox.class_id()
    }
}

/// Intersection over union of two boxes; class ids are ignored.
pub fn iou(a: &NormalizedBox, b: &NormalizedBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let ih = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Keeps detections with `confidence >= threshold`, preserving order.
pub fn filter_confidence(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter().filter(|d| d.confidence >= threshold).copied().collect()
}

/// Parses a prediction file: one `<class> <cx> <cy> <w> <h> <conf>` per line.
pub fn parse_prediction_file(text: &str, class_count: usize) -> Result<Vec<Detection>, LabelError> {
    records(text)
        .map(|(line, fields)| parse_detection_fields(&fields, class_count).map_err(|kind| LabelError { line, kind }))
        .collect()
}

pub(crate) fn parse_detection_fields(fields: &[&str], class_count: usize) -> Result<Detection, LabelErrorKind> {
    if fields.len() != 6 {
        return Err(LabelErrorKind::FieldCount { expected: 6, found: fields.len() });
    }
    let bbox = parse_box_fields(&fields[..5], class_count)?;
    let confidence = parse_number(fields[5], 6)?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(LabelErrorKind::NotANumber { field: 6, token: fields[5].to_string() });
    }
    Ok(Detection { bbox, confidence })
}

pub fn serialize_predictions(dets: &[Detection]) -> String {
    let mut out = String::new();
    for d in dets {
        write_box(&mut out, &d.bbox);
        out.push_str(&format!(" {:.6}\n", d.confidence));
    }
    out
}
