//! Reader and writer for YOLO `.txt` label files.
//!
//! One record per line: `<class_id> <cx> <cy> <w> <h>`, space separated,
//! coordinates normalized to the image size. The writer always emits six
//! decimals and LF line endings; the reader also accepts CRLF, tabs, runs
//! of spaces and a missing final newline.

use std::fmt::Write as _;

use thiserror::Error;

use super::boxes::{BoxError, NormalizedBox};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabelErrorKind {
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid class id {token:?}")]
    InvalidClassId { token: String },
    #[error("field {field} is not a number: {token:?}")]
    NotANumber { field: usize, token: String },
    #[error("class id {class_id} out of range for {class_count} classes")]
    ClassOutOfRange { class_id: u32, class_count: usize },
    #[error(transparent)]
    Bounds(#[from] BoxError),
}

/// A label-file diagnostic; `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct LabelError {
    pub line: usize,
    pub kind: LabelErrorKind,
}

/// Iterates `(line_number, fields)` over non-blank lines.
pub(crate) fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.split('\n').enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let fields: Vec<&str> = line.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

pub(crate) fn parse_class(token: &str, class_count: usize) -> Result<u32, LabelErrorKind> {
    let class_id: u32 = token
        .parse()
        .map_err(|_| LabelErrorKind::InvalidClassId { token: token.to_string() })?;
    if class_id as usize >= class_count {
        return Err(LabelErrorKind::ClassOutOfRange { class_id, class_count });
    }
    Ok(class_id)
}

pub(crate) fn parse_number(token: &str, field: usize) -> Result<f64, LabelErrorKind> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| LabelErrorKind::NotANumber { field, token: token.to_string() })
}

/// Parses the five box fields starting at `fields[0]`.
pub(crate) fn parse_box_fields(fields: &[&str], class_count: usize) -> Result<NormalizedBox, LabelErrorKind> {
    let class_id = parse_class(fields[0], class_count)?;
    let mut coords = [0.0; 4];
    for (k, slot) in coords.iter_mut().enumerate() {
        *slot = parse_number(fields[k + 1], k + 2)?;
    }
    let [cx, cy, w, h] = coords;
    Ok(NormalizedBox::new(class_id, cx, cy, w, h)?)
}

pub fn parse_label_file(text: &str, class_count: usize) -> Result<Vec<NormalizedBox>, LabelError> {
    records(text)
        .map(|(line, fields)| {
            if fields.len() != 5 {
                return Err(LabelError {
                    line,
                    kind: LabelErrorKind::FieldCount { expected: 5, found: fields.len() },
                });
            }
            parse_box_fields(&fields, class_count).map_err(|kind| LabelError { line, kind })
        })
        .collect()
}

pub(crate) fn write_box(out: &mut String, b: &NormalizedBox) {
    let _ = write!(out, "{} {:.6} {:.6} {:.6} {:.6}", b.class_id(), b.cx(), b.cy(), b.w(), b.h());
}

pub fn serialize_labels(boxes: &[NormalizedBox]) -> String {
    let mut out = String::with_capacity(boxes.len() * 40);
    for b in boxes {
        write_box(&mut out, b);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_record() {
        let boxes = parse_label_file("0 0.5 0.5 0.2 0.3", 1).unwrap();
        assert_eq!(boxes, vec![NormalizedBox::new(0, 0.5, 0.5, 0.2, 0.3).unwrap()]);
    }

    #[test]
    fn empty_and_blank_inputs() {
        assert!(parse_label_file("", 1).unwrap().is_empty());
        assert!(parse_label_file("\n  \r\n", 1).unwrap().is_empty());
    }

    #[test]
    fn class_range_error() {
        let err = parse_label_file("5 0.5 0.5 0.2 0.3", 1).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(err.kind, LabelErrorKind::ClassOutOfRange { class_id: 5, class_count: 1 }));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "0 0.5 0.5 0.2 0.3\n\n0 0.5 abc 0.2 0.3\n";
        let err = parse_label_file(text, 1).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, LabelErrorKind::NotANumber { field: 3, .. }));
        assert_eq!(err.to_string(), "line 3: field 3 is not a number: \"abc\"");
    }

    #[test]
    fn accepts_crlf_and_missing_trailing_newline() {
        let boxes = parse_label_file("0 0.1 0.1 0.1 0.1\r\n0 0.2 0.2 0.1 0.1", 1).unwrap();
        assert_eq!(boxes.len(), 2);
    }

    #[test]
    fn serializes_six_decimals_lf() {
        let b = NormalizedBox::new(0, 0.5, 0.5, 0.2, 0.3).unwrap();
        assert_eq!(serialize_labels(&[b]), "0 0.500000 0.500000 0.200000 0.300000\n");
        assert_eq!(serialize_labels(&[]), "");
    }

    #[test]
    fn rejects_negative_and_fractional_class() {
        for text in ["-1 0.5 0.5 0.1 0.1", "0.0 0.5 0.5 0.1 0.1"] {
            let err = parse_label_file(text, 3).unwrap_err();
            assert!(matches!(err.kind, LabelErrorKind::InvalidClassId { .. }), "{text}");
        }
    }
}
