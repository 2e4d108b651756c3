use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::NormalizedBox;
use crate::detect::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Detection,
    NonDetection,
    /// Inference failed or ran past its deadline; excluded from latency stats.
    Error,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Detection => "detection",
            Outcome::NonDetection => "non_detection",
            Outcome::Error => "error",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    Pending,
    Saved,
    Skipped,
}

impl fmt::Display for Disposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disposition::Pending => "pending",
            Disposition::Saved => "saved",
            Disposition::Skipped => "skipped",
        })
    }
}

/// One pass of a frame through the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    /// Milliseconds since session start on the monotonic clock.
    pub capture_timestamp_ms: f64,
    pub source_name: String,
    /// After post-processing, before any operator edits.
    pub detections: Vec<Detection>,
    /// Wall time of the inference call only.
    pub inference_latency_ms: f64,
    /// Capture through detection, for diagnostics.
    pub end_to_end_ms: f64,
    pub outcome: Outcome,
    pub disposition: Disposition,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum OperatorCommand {
    Save,
    Skip,
    SetClass { class_id: u32 },
    /// Replaces the geometry of box `index`; its class is kept.
    AdjustBox { index: usize, cx: f64, cy: f64, w: f64, h: f64 },
    DeleteBox { index: usize },
    Quit,
}

impl OperatorCommand {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorCommand::Save => "save",
            OperatorCommand::Skip => "skip",
            OperatorCommand::SetClass { .. } => "set_class",
            OperatorCommand::AdjustBox { .. } => "adjust_box",
            OperatorCommand::DeleteBox { .. } => "delete_box",
            OperatorCommand::Quit => "quit",
        }
    }

    /// Local keyboard mapping: Enter saves, `s` skips, a digit sets the
    /// class, `d` deletes the highlighted box and `q` quits. `key` is one
    /// line of terminal input, so an empty line is Enter.
    pub fn from_key(key: &str, highlighted: usize) -> Option<Self> {
        let key = key.trim();
        match key {
            "" => Some(OperatorCommand::Save),
            "s" | "S" => Some(OperatorCommand::Skip),
            "d" | "D" => Some(OperatorCommand::DeleteBox { index: highlighted }),
            "q" | "Q" => Some(OperatorCommand::Quit),
            _ if key.len() == 1 => key.parse().ok().map(|class_id| OperatorCommand::SetClass { class_id }),
            _ => None,
        }
    }
}

pub(crate) fn adjusted(old: &NormalizedBox, cx: f64, cy: f64, w: f64, h: f64) -> Result<NormalizedBox, crate::annotation::BoxError> {
    NormalizedBox::new(old.class_id(), cx, cy, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_mapping() {
        assert_eq!(OperatorCommand::from_key("\n", 0), Some(OperatorCommand::Save));
        assert_eq!(OperatorCommand::from_key("s", 0), Some(OperatorCommand::Skip));
        assert_eq!(OperatorCommand::from_key("3", 0), Some(OperatorCommand::SetClass { class_id: 3 }));
        assert_eq!(OperatorCommand::from_key("d", 2), Some(OperatorCommand::DeleteBox { index: 2 }));
        assert_eq!(OperatorCommand::from_key("Q", 0), Some(OperatorCommand::Quit));
        assert_eq!(OperatorCommand::from_key("x", 0), None);
        assert_eq!(OperatorCommand::from_key("12", 0), None);
    }

    #[test]
    fn command_wire_shape() {
        let json = serde_json::to_value(OperatorCommand::SetClass { class_id: 1 }).unwrap();
        assert_eq!(json, serde_json::json!({"action": "set_class", "class_id": 1}));
        let back: OperatorCommand = serde_json::from_str(r#"{"action":"delete_box","index":0}"#).unwrap();
        assert_eq!(back, OperatorCommand::DeleteBox { index: 0 });
    }
}
