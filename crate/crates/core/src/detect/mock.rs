//! Scripted backend for tests and dry runs.
//!
//! Script format, one frame per line (`#` starts a comment):
//!
//! ```text
//! # frame delay_ms | class cx cy w h conf | ...
//! 0 50 | 0 0.50 0.50 0.20 0.20 0.91 | 0 0.10 0.12 0.05 0.06 0.40
//! 1 100
//! * 20
//! ```
//!
//! The frame index counts `infer` calls from zero. A `*` line sets the
//! entry for frames the script does not list; without one they get no
//! delay and no detections.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::thread;
use std::time::{Duration, Instant};

use image::RgbImage;
use thiserror::Error;

use super::backend::{Backend, BackendDescriptor, DetectError};
use super::detection::{parse_detection_fields, Detection};
use crate::annotation::LabelErrorKind;

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, detection {index}: {source}")]
    Detection { line: usize, index: usize, source: LabelErrorKind },
    #[error("line {line}: frame {frame} listed twice")]
    Duplicate { line: usize, frame: u64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptedFrame {
    pub delay: Duration,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockScript {
    pub frames: BTreeMap<u64, ScriptedFrame>,
    pub default: ScriptedFrame,
}

impl MockScript {
    pub fn parse(text: &str, class_count: usize) -> Result<Self, ScriptError> {
        let mut script = MockScript::default();
        let mut default_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split('|');
            let head: Vec<&str> = parts.next().unwrap_or("").split_whitespace().collect();
            let [frame, delay] = head[..] else {
                return Err(ScriptError::Syntax { line, message: "expected `<frame> <delay_ms>`".into() });
            };
            let delay_ms: f64 = delay
                .parse()
                .ok()
                .filter(|d: &f64| d.is_finite() && *d >= 0.0)
                .ok_or_else(|| ScriptError::Syntax { line, message: format!("bad delay {delay:?}") })?;
            let mut detections = Vec::new();
            for (index, chunk) in parts.enumerate() {
                let fields: Vec<&str> = chunk.split_whitespace().collect();
                let det = parse_detection_fields(&fields, class_count)
                    .map_err(|source| ScriptError::Detection { line, index, source })?;
                detections.push(det);
            }
            let entry = ScriptedFrame { delay: Duration::from_nanos((delay_ms * 1e6).round() as u64), detections };
            if frame == "*" {
                if default_seen {
                    return Err(ScriptError::Syntax { line, message: "second `*` line".into() });
                }
                default_seen = true;
                script.default = entry;
            } else {
                let idx: u64 = frame
                    .parse()
                    .map_err(|_| ScriptError::Syntax { line, message: format!("bad frame index {frame:?}") })?;
                if script.frames.insert(idx, entry).is_some() {
                    return Err(ScriptError::Duplicate { line, frame: idx });
                }
            }
        }
        Ok(script)
    }

    pub fn frame(&self, index: u64) -> &ScriptedFrame {
        self.frames.get(&index).unwrap_or(&self.default)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut write_entry = |key: String, f: &ScriptedFrame| {
            let _ = write!(out, "{key} {}", f.delay.as_nanos() as f64 / 1e6);
            for d in &f.detections {
                let b = d.bbox;
                let _ = write!(
                    out,
                    " | {} {:.6} {:.6} {:.6} {:.6} {:.6}",
                    b.class_id(),
                    b.cx(),
                    b.cy(),
                    b.w(),
                    b.h(),
                    d.confidence
                );
            }
            out.push('\n');
        };
        for (idx, f) in &self.frames {
            write_entry(idx.to_string(), f);
        }
        if self.default != ScriptedFrame::default() {
            write_entry("*".into(), &self.default);
        }
        out
    }
}

pub struct MockBackend {
    descriptor: BackendDescriptor,
    script: MockScript,
    calls: u64,
}

impl MockBackend {
    pub fn new(script: MockScript, input_size: (u32, u32)) -> Self {
        Self {
            descriptor: BackendDescriptor {
                id: "mock".into(),
                model_label: "scripted".into(),
                expected_input: (input_size.0, input_size.1, 3),
            },
            script,
            calls: 0,
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl Backend for MockBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn infer(&mut self, _frame: &RgbImage, deadline: Option<Duration>) -> Result<Vec<Detection>, DetectError> {
        let entry = self.script.frame(self.calls).clone();
        self.calls += 1;
        let start = Instant::now();
        match deadline {
            Some(limit) if entry.delay > limit => {
                thread::sleep(limit);
                Err(DetectError::Timeout { elapsed: start.elapsed() })
            }
            _ => {
                thread::sleep(entry.delay);
                Ok(entry.detections)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::NormalizedBox;
    use crate::detect::{detect, DetectorConfig};

    const SCRIPT: &str = "\
# comment
0 0 | 0 0.5 0.5 0.2 0.2 0.9 | 0 0.52 0.5 0.2 0.2 0.8
2 5 | 1 0.1 0.1 0.1 0.1 0.6
* 1
";

    #[test]
    fn parses_entries_and_default() {
        let s = MockScript::parse(SCRIPT, 2).unwrap();
        assert_eq!(s.frame(0).detections.len(), 2);
        assert_eq!(s.frame(2).delay, Duration::from_millis(5));
        assert_eq!(s.frame(1).delay, Duration::from_millis(1));
        assert!(s.frame(7).detections.is_empty());
        assert_eq!(MockScript::parse(&s.to_text(), 2).unwrap(), s);
    }

    #[test]
    fn reports_bad_lines() {
        assert!(matches!(MockScript::parse("0", 1), Err(ScriptError::Syntax { line: 1, .. })));
        assert!(matches!(
            MockScript::parse("0 1\n1 2 | 3 0.5 0.5 0.1 0.1 0.5", 1),
            Err(ScriptError::Detection { line: 2, index: 0, .. })
        ));
        assert!(matches!(MockScript::parse("0 1\n0 2", 1), Err(ScriptError::Duplicate { line: 2, frame: 0 })));
    }

    #[test]
    fn scripted_boxes_come_back_post_processed() {
        let mut backend = MockBackend::new(MockScript::parse(SCRIPT, 2).unwrap(), (8, 8));
        let frame = RgbImage::new(8, 8);
        let out = detect(&mut backend, &frame, &DetectorConfig::default(), false).unwrap();
        // The two frame-0 boxes overlap above 0.45, so NMS keeps the 0.9 one.
        assert_eq!(out.detections, vec![Detection::new(NormalizedBox::new(0, 0.5, 0.5, 0.2, 0.2).unwrap(), 0.9)]);
        let empty = detect(&mut backend, &frame, &DetectorConfig::default(), false).unwrap();
        assert!(empty.detections.is_empty());
    }

    #[test]
    fn injected_delay_is_measured() {
        let script = MockScript::parse("0 50", 1).unwrap();
        let mut backend = MockBackend::new(script, (4, 4));
        let out = detect(&mut backend, &RgbImage::new(4, 4), &DetectorConfig::default(), false).unwrap();
        assert!(out.latency >= Duration::from_millis(50));
    }

    #[test]
    fn deadline_and_input_checks() {
        let script = MockScript::parse("0 200", 1).unwrap();
        let mut backend = MockBackend::new(script, (4, 4));
        let cfg = DetectorConfig { deadline: Some(Duration::from_millis(20)), ..DetectorConfig::default() };
        let err = detect(&mut backend, &RgbImage::new(4, 4), &cfg, false).unwrap_err();
        match err {
            DetectError::Timeout { elapsed } => assert!(elapsed >= Duration::from_millis(20)),
            other => panic!("expected timeout, got {other}"),
        }
        let err = detect(&mut backend, &RgbImage::new(5, 4), &cfg, false).unwrap_err();
        assert!(matches!(err, DetectError::InputMismatch { .. }));
    }
}
