use std::path::PathBuf;
use std::time::{Duration, Instant};

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::detection::{filter_confidence, Detection};
use super::nms::{nms, nms_per_class};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("input is {got:?}, backend expects {expected:?}")]
    InputMismatch { expected: (u32, u32), got: (u32, u32) },
    #[error("inference failed: {0}")]
    Inference(String),
    #[error("inference exceeded its deadline after {} ms", .elapsed.as_millis())]
    Timeout { elapsed: Duration },
}

/// Identity and input contract of a detector backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub id: String,
    /// Human-readable configuration label, e.g. `yolov8-single-pretrained`.
    pub model_label: String,
    /// `(width, height, channels)`.
    pub expected_input: (u32, u32, u32),
}

impl BackendDescriptor {
    pub fn input_size(&self) -> (u32, u32) {
        (self.expected_input.0, self.expected_input.1)
    }
}

/// Post-processing and deadline settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub confidence_threshold: f64,
    pub nms_iou_threshold: f64,
    pub backend_id: String,
    /// Exported model artifact for backends that load one.
    pub model_path: Option<PathBuf>,
    pub input_size: (u32, u32),
    #[serde(with = "opt_millis")]
    pub deadline: Option<Duration>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.25,
            nms_iou_threshold: 0.45,
            backend_id: "mock".into(),
            model_path: None,
            input_size: (640, 640),
            deadline: None,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(format!("confidence threshold {} outside [0, 1]", self.confidence_threshold));
        }
        if !(self.nms_iou_threshold > 0.0 && self.nms_iou_threshold < 1.0) {
            return Err(format!("NMS IoU threshold {} outside (0, 1)", self.nms_iou_threshold));
        }
        Ok(())
    }
}

mod opt_millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&(d.as_millis() as u64)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}

/// A source of raw (pre-NMS) detections for one frame at a time.
///
/// Backends may honour `deadline` themselves and return
/// [`DetectError::Timeout`] early; [`detect`] enforces it regardless.
pub trait Backend: Send {
    fn descriptor(&self) -> &BackendDescriptor;

    fn infer(&mut self, frame: &RgbImage, deadline: Option<Duration>) -> Result<Vec<Detection>, DetectError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        (**self).descriptor()
    }

    fn infer(&mut self, frame: &RgbImage, deadline: Option<Duration>) -> Result<Vec<Detection>, DetectError> {
        (**self).infer(frame, deadline)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOutput {
    pub detections: Vec<Detection>,
    /// Wall time of inference plus post-processing.
    pub latency: Duration,
}

/// Confidence filter, then NMS (class-agnostic unless `per_class`).
pub fn postprocess(raw: &[Detection], cfg: &DetectorConfig, per_class: bool) -> Vec<Detection> {
    let confident = filter_confidence(raw, cfg.confidence_threshold);
    if per_class {
        nms_per_class(&confident, cfg.nms_iou_threshold)
    } else {
        nms(&confident, cfg.nms_iou_threshold)
    }
}

/// Runs one frame through `backend` and post-processes the result.
///
/// `frame` must already have the backend's input size.
pub fn detect<B: Backend + ?Sized>(
    backend: &mut B,
    frame: &RgbImage,
    cfg: &DetectorConfig,
    per_class: bool,
) -> Result<DetectOutput, DetectError> {
    let expected = backend.descriptor().input_size();
    if frame.dimensions() != expected {
        return Err(DetectError::InputMismatch { expected, got: frame.dimensions() });
    }
    let start = Instant::now();
    let raw = backend.infer(frame, cfg.deadline)?;
    let detections = postprocess(&raw, cfg, per_class);
    let latency = start.elapsed();
    if let Some(deadline) = cfg.deadline {
        if latency > deadline {
            return Err(DetectError::Timeout { elapsed: latency });
        }
    }
    Ok(DetectOutput { detections, latency })
}
