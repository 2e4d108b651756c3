use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::{Disposition, FrameRecord, Outcome};
use super::SessionError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: usize,
    /// Zero when `count` is zero.
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl LatencySummary {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut count, mut sum, mut min, mut max) = (0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            count += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        if count == 0 {
            return Self::default();
        }
        Self { count, mean_ms: sum / count as f64, min_ms: min, max_ms: max }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub frames_processed: usize,
    pub frames_saved: usize,
    pub frames_skipped: usize,
    pub frames_pending: usize,
    pub detection_frames: usize,
    pub non_detection_frames: usize,
    pub error_frames: usize,
    /// Over detection and non-detection frames; error frames are excluded.
    pub latency: LatencySummary,
    pub detection_latency: LatencySummary,
    pub non_detection_latency: LatencySummary,
}

/// Compact per-frame row, the unit of latency analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub frame_id: u64,
    pub outcome: Outcome,
    pub latency_ms: f64,
    pub disposition: Disposition,
}

impl From<&FrameRecord> for LatencyRow {
    fn from(r: &FrameRecord) -> Self {
        Self { frame_id: r.frame_id, outcome: r.outcome, latency_ms: r.inference_latency_ms, disposition: r.disposition }
    }
}

impl SessionStats {
    pub fn from_rows(rows: &[LatencyRow]) -> Self {
        let by = |o: Outcome| rows.iter().filter(move |r| r.outcome == o).map(|r| r.latency_ms);
        let count_disp = |d: Disposition| rows.iter().filter(|r| r.disposition == d).count();
        Self {
            frames_processed: rows.len(),
            frames_saved: count_disp(Disposition::Saved),
            frames_skipped: count_disp(Disposition::Skipped),
            frames_pending: count_disp(Disposition::Pending),
            detection_frames: by(Outcome::Detection).count(),
            non_detection_frames: by(Outcome::NonDetection).count(),
            error_frames: by(Outcome::Error).count(),
            latency: LatencySummary::from_values(rows.iter().filter(|r| r.outcome != Outcome::Error).map(|r| r.latency_ms)),
            detection_latency: LatencySummary::from_values(by(Outcome::Detection)),
            non_detection_latency: LatencySummary::from_values(by(Outcome::NonDetection)),
        }
    }

    /// Plain-text summary with means split by outcome.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "frames: {} processed, {} saved, {} skipped, {} pending",
            self.frames_processed, self.frames_saved, self.frames_skipped, self.frames_pending
        );
        let _ = writeln!(
            out,
            "outcomes: {} detection, {} non_detection, {} error",
            self.detection_frames, self.non_detection_frames, self.error_frames
        );
        for (label, s) in [
            ("all", &self.latency),
            ("detection", &self.detection_latency),
            ("non_detection", &self.non_detection_latency),
        ] {
            let _ = writeln!(
                out,
                "latency {label}: mean {:.2} ms (min {:.2}, max {:.2}, n={})",
                s.mean_ms, s.min_ms, s.max_ms, s.count
            );
        }
        out
    }
}

pub const SESSION_CSV_HEADER: &str = "frame_id,outcome,latency_ms,disposition";

/// One row per processed frame, error frames included.
pub fn latency_csv(rows: &[LatencyRow]) -> String {
    let mut out = format!("{SESSION_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.3},{}", r.frame_id, r.outcome, r.latency_ms, r.disposition);
    }
    out
}

pub fn parse_latency_csv(text: &str) -> Result<Vec<LatencyRow>, SessionError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| SessionError::Report(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>().join(",") != SESSION_CSV_HEADER {
        return Err(SessionError::Report(format!("expected header `{SESSION_CSV_HEADER}`")));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| SessionError::Report(format!("row {}: {e}", i + 2))))
        .collect()
}
