//! JSON envelopes exchanged over `/stream`.

use base64::Engine as _;
use fieldlabel_core::detect::Detection;
use fieldlabel_core::session::{OperatorCommand, Outcome, PendingFrame, SessionError, SessionStats};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireDetection {
    pub class_id: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub conf: f64,
}

impl From<&Detection> for WireDetection {
    fn from(d: &Detection) -> Self {
        let b = &d.bbox;
        Self { class_id: b.class_id(), cx: b.cx(), cy: b.cy(), w: b.w(), h: b.h(), conf: d.confidence }
    }
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame {
        frame_id: u64,
        /// Base64 JPEG of the frame as the detector saw it.
        image_b64: String,
        detections: Vec<WireDetection>,
        latency_ms: f64,
        outcome: Outcome,
    },
    Ack {
        frame_id: u64,
        action: String,
    },
    Error {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        frame_id: Option<u64>,
        code: ErrorCode,
        message: String,
    },
    Stats {
        running: bool,
        /// True once the source is exhausted.
        finished: bool,
        stats: SessionStats,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Another operator already holds the stream.
    Busy,
    BadRequest,
    StaleFrame,
    InvalidCommand,
    /// The frame could not be processed; the session moves on.
    Inference,
    Stopped,
    Internal,
}

impl ServerMessage {
    pub fn frame(pending: &PendingFrame, latency_ms: f64, outcome: Outcome) -> Result<Self, SessionError> {
        Ok(ServerMessage::Frame {
            frame_id: pending.frame_id,
            image_b64: base64::engine::general_purpose::STANDARD.encode(pending.jpeg()?),
            detections: pending.detections.iter().map(WireDetection::from).collect(),
            latency_ms,
            outcome,
        })
    }

    pub fn error(frame_id: Option<u64>, code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error { frame_id, code, message: message.into() }
    }

    pub fn from_session_error(frame_id: Option<u64>, e: &SessionError) -> Self {
        let code = match e {
            SessionError::StaleFrame { .. } => ErrorCode::StaleFrame,
            SessionError::InvalidClass(_) | SessionError::InvalidBox(_) | SessionError::InvalidBoxIndex { .. } => {
                ErrorCode::InvalidCommand
            }
            SessionError::Stopped => ErrorCode::Stopped,
            _ => ErrorCode::Internal,
        };
        Self::error(frame_id, code, e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Command {
        frame_id: u64,
        #[serde(flatten)]
        command: OperatorCommand,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn command_envelopes() {
        let save: ClientMessage = serde_json::from_str(r#"{"type":"command","frame_id":4,"action":"save"}"#).unwrap();
        assert_eq!(save, ClientMessage::Command { frame_id: 4, command: OperatorCommand::Save });
        let set: ClientMessage =
            serde_json::from_str(r#"{"type":"command","frame_id":1,"action":"set_class","class_id":3}"#).unwrap();
        assert_eq!(set, ClientMessage::Command { frame_id: 1, command: OperatorCommand::SetClass { class_id: 3 } });
        let adjust = ClientMessage::Command {
            frame_id: 2,
            command: OperatorCommand::AdjustBox { index: 0, cx: 0.5, cy: 0.5, w: 0.1, h: 0.2 },
        };
        assert_eq!(
            serde_json::to_value(&adjust).unwrap(),
            json!({"type":"command","frame_id":2,"action":"adjust_box","index":0,"cx":0.5,"cy":0.5,"w":0.1,"h":0.2})
        );
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"command","action":"save"}"#).is_err());
    }

    #[test]
    fn ack_and_error_shape() {
        let ack = ServerMessage::Ack { frame_id: 7, action: "save".into() };
        assert_eq!(serde_json::to_value(&ack).unwrap(), json!({"type":"ack","frame_id":7,"action":"save"}));
        let busy = ServerMessage::error(None, ErrorCode::Busy, "taken");
        assert_eq!(serde_json::to_value(&busy).unwrap(), json!({"type":"error","code":"busy","message":"taken"}));
    }
}
