//! Detections, IoU, confidence filtering, NMS and the backend contract.

mod backend;
mod detection;
mod mock;
mod nms;
mod process;

pub use backend::{detect, postprocess, Backend, BackendDescriptor, DetectError, DetectOutput, DetectorConfig};
pub use detection::{filter_confidence, iou, parse_prediction_file, serialize_predictions, Detection};
pub use mock::{MockBackend, MockScript, ScriptError, ScriptedFrame};
pub use nms::{nms, nms_per_class};
pub use process::ProcessBackend;
