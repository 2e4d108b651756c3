//! Serves a live annotation session to a browser operator.
//!
//! `GET /stream` upgrades to a WebSocket carrying JSON envelopes (see
//! [`messages`]). One operator at a time; further connections get a
//! `busy` error and are closed. `GET /status` returns a snapshot of the
//! session counters and `POST /stop` stops the session and returns the
//! latency report path.
//!
//! The stream is paced by the operator: the next frame is processed only
//! after the pending one is saved or skipped. A dropped connection leaves
//! the session at its pending frame, which is re-sent on reconnect.

pub mod messages;
mod server;

use std::net::SocketAddr;

use fieldlabel_core::session::SessionError;
use thiserror::Error;

pub use messages::{ClientMessage, ErrorCode, ServerMessage, WireDetection};
pub use server::{router, Gateway, GatewayState, StatusSnapshot, StopResponse};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("cannot bind {0}: {1}")]
    Bind(SocketAddr, std::io::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("server task failed: {0}")]
    Server(String),
}
