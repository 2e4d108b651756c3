//! The live annotation loop: capture, detection, operator commands,
//! crash-safe persistence and latency accounting.

mod engine;
mod persist;
mod record;
mod report;
mod source;

use std::path::PathBuf;

use thiserror::Error;

use crate::annotation::BoxError;
use crate::detect::DetectError;

pub use engine::{
    CommandEffect, PendingFrame, Session, SessionConfig, SessionReport, MANIFEST_FILE, SESSION_CSV, STATS_FILE,
};
pub use persist::{frame_stem, recover_session_dir, FaultPoint, RecoveryReport, IMAGES_DIR, LABELS_DIR};
pub use record::{Disposition, FrameRecord, OperatorCommand, Outcome};
pub use report::{latency_csv, parse_latency_csv, LatencyRow, LatencySummary, SessionStats, SESSION_CSV_HEADER};
pub use source::{live_source, DirectorySource, FrameSource, LiveFeed, LiveSource, SourceFrame, SourceSpec};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("frame source unavailable: {0}")]
    SourceUnavailable(String),
    #[error("output root {path} is not writable: {reason}", path = .0.display(), reason = .1)]
    OutputNotWritable(PathBuf, String),
    #[error("invalid session config: {0}")]
    Config(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("frame {0} is still pending; save or skip it first")]
    PendingFrame(u64),
    #[error("command targets frame {requested} but the pending frame is {}", .pending.map_or("none".to_string(), |p| p.to_string()))]
    StaleFrame { requested: u64, pending: Option<u64> },
    #[error("class {0} is not in the session class map")]
    InvalidClass(u32),
    #[error("box index {index} out of range for {len} boxes")]
    InvalidBoxIndex { index: usize, len: usize },
    #[error("invalid box: {0}")]
    InvalidBox(#[from] BoxError),
    #[error("session is stopped")]
    Stopped,
    #[error("persistence failed: {0}")]
    Persist(String),
    #[error("injected fault at {0:?}")]
    InjectedFault(FaultPoint),
    #[error("bad session report: {0}")]
    Report(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
