use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::persist::{encode_jpeg, save_frame, FaultPoint, IMAGES_DIR, LABELS_DIR};
use super::record::{adjusted, Disposition, FrameRecord, OperatorCommand, Outcome};
use super::report::{latency_csv, LatencyRow, SessionStats};
use super::source::{FrameSource, SourceSpec};
use super::SessionError;
use crate::annotation::{serialize_labels, ClassMap, NormalizedBox};
use crate::detect::{detect, Backend, BackendDescriptor, DetectError, Detection, DetectorConfig};
use crate::prep::stretch_pixels;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SESSION_CSV: &str = "session.csv";
pub const STATS_FILE: &str = "stats.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub source: SourceSpec,
    pub detector: DetectorConfig,
    /// Each session gets its own timestamped directory below this.
    pub output_root: PathBuf,
    pub class_map: ClassMap,
    /// Class written for every box in single-class sessions, and the target
    /// of `SetClass` in multi-class ones.
    pub active_class: u32,
    /// Save every frame without waiting for the operator.
    pub auto_save: bool,
}

impl SessionConfig {
    pub fn new(source: SourceSpec, output_root: impl Into<PathBuf>, class_map: ClassMap) -> Self {
        Self {
            source,
            detector: DetectorConfig::default(),
            output_root: output_root.into(),
            class_map,
            active_class: 0,
            auto_save: false,
        }
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        self.detector.validate().map_err(SessionError::Config)?;
        if !self.class_map.contains_id(self.active_class) {
            return Err(SessionError::InvalidClass(self.active_class));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    started_at: String,
    config: &'a SessionConfig,
    backend: &'a BackendDescriptor,
}

/// The frame waiting for an operator decision.
#[derive(Debug, Clone)]
pub struct PendingFrame {
    pub frame_id: u64,
    /// Pixels as given to the detector.
    pub image: RgbImage,
    /// Post-processed detections with any operator edits applied.
    pub detections: Vec<Detection>,
}

impl PendingFrame {
    /// The frame as it would be saved.
    pub fn jpeg(&self) -> Result<Vec<u8>, SessionError> {
        encode_jpeg(&self.image)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandEffect {
    Saved { image: PathBuf, label: PathBuf },
    Skipped,
    ClassSet(u32),
    BoxesEdited(usize),
    Stopped { report: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub stats: SessionStats,
    pub rows: Vec<LatencyRow>,
}

impl SessionReport {
    pub fn csv(&self) -> String {
        latency_csv(&self.rows)
    }
}

pub struct Session {
    cfg: SessionConfig,
    dir: PathBuf,
    source: Box<dyn FrameSource>,
    backend: Box<dyn Backend>,
    records: Vec<FrameRecord>,
    pending: Option<PendingFrame>,
    next_id: u64,
    started: Instant,
    stopped: Option<PathBuf>,
    fault: Option<FaultPoint>,
}

fn unique_session_dir(root: &Path) -> Result<PathBuf, SessionError> {
    let not_writable = |e: io::Error| SessionError::OutputNotWritable(root.to_path_buf(), e.to_string());
    fs::create_dir_all(root).map_err(not_writable)?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S").to_string();
    for n in 0u32.. {
        let name = if n == 0 { stamp.clone() } else { format!("{stamp}-{n}") };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(not_writable(e)),
        }
    }
    unreachable!("u32 range exhausted")
}

impl Session {
    /// Opens the configured source and starts a session.
    pub fn start(cfg: SessionConfig, backend: Box<dyn Backend>) -> Result<Self, SessionError> {
        cfg.validate()?;
        let source = cfg.source.open()?;
        Self::start_with_source(cfg, source, backend)
    }

    /// Starts a session on an already opened source, e.g. a live feed.
    pub fn start_with_source(
        cfg: SessionConfig,
        source: Box<dyn FrameSource>,
        backend: Box<dyn Backend>,
    ) -> Result<Self, SessionError> {
        cfg.validate()?;
        let dir = unique_session_dir(&cfg.output_root)?;
        fs::create_dir(dir.join(IMAGES_DIR))?;
        fs::create_dir(dir.join(LABELS_DIR))?;
        let manifest = Manifest {
            started_at: chrono::Local::now().to_rfc3339(),
            config: &cfg,
            backend: backend.descriptor(),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| SessionError::Persist(e.to_string()))?;
        fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
        log::info!("session started in {}", dir.display());
        Ok(Self {
            cfg,
            dir,
            source,
            backend,
            records: Vec::new(),
            pending: None,
            next_id: 0,
            started: Instant::now(),
            stopped: None,
            fault: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn active_class(&self) -> u32 {
        self.cfg.active_class
    }

    pub fn is_running(&self) -> bool {
        self.stopped.is_none()
    }

    pub fn source_len(&self) -> Option<usize> {
        self.source.len_hint()
    }

    pub fn records(&self) -> &[FrameRecord] {
        &self.records
    }

    pub fn record(&self, frame_id: u64) -> Option<&FrameRecord> {
        self.records.binary_search_by_key(&frame_id, |r| r.frame_id).ok().map(|i| &self.records[i])
    }

    pub fn pending(&self) -> Option<&PendingFrame> {
        self.pending.as_ref()
    }

    /// Makes the next save fail at `point`, leaving the files as a crash
    /// there would. One-shot.
    pub fn inject_fault(&mut self, point: FaultPoint) {
        self.fault = Some(point);
    }

    fn record_mut(&mut self, frame_id: u64) -> &mut FrameRecord {
        let i = self.records.binary_search_by_key(&frame_id, |r| r.frame_id).expect("pending frame has a record");
        &mut self.records[i]
    }

    /// Captures, resizes and runs detection on the next frame.
    ///
    /// Returns `Ok(None)` at end of stream. Without auto-save the previous
    /// frame must be saved or skipped first. A timed-out or failed
    /// inference yields a record with outcome `error` and no pending frame.
    pub fn process_next(&mut self) -> Result<Option<FrameRecord>, SessionError> {
        if self.stopped.is_some() {
            return Err(SessionError::Stopped);
        }
        if let Some(p) = &self.pending {
            return Err(SessionError::PendingFrame(p.frame_id));
        }
        let Some(frame) = self.source.next_frame()? else {
            return Ok(None);
        };
        let frame_id = self.next_id;
        self.next_id += 1;
        let resized = stretch_pixels(&frame.image, self.backend.descriptor().input_size());
        let per_class = !self.cfg.class_map.is_single_class();
        let result = detect(self.backend.as_mut(), &resized, &self.cfg.detector, per_class);
        let end_to_end_ms = frame.captured.elapsed().as_secs_f64() * 1e3;
        let mut record = FrameRecord {
            frame_id,
            capture_timestamp_ms: frame.captured.saturating_duration_since(self.started).as_secs_f64() * 1e3,
            source_name: frame.name,
            detections: Vec::new(),
            inference_latency_ms: 0.0,
            end_to_end_ms,
            outcome: Outcome::Error,
            disposition: Disposition::Skipped,
            error: None,
        };
        match result {
            Ok(out) => {
                record.outcome = if out.detections.is_empty() { Outcome::NonDetection } else { Outcome::Detection };
                record.inference_latency_ms = out.latency.as_secs_f64() * 1e3;
                record.disposition = Disposition::Pending;
                record.detections = out.detections.clone();
                self.pending = Some(PendingFrame { frame_id, image: resized, detections: out.detections });
            }
            Err(e @ (DetectError::Timeout { .. } | DetectError::Inference(_))) => {
                if let DetectError::Timeout { elapsed } = e {
                    record.inference_latency_ms = elapsed.as_secs_f64() * 1e3;
                }
                log::warn!("frame {frame_id}: {e}");
                record.error = Some(e.to_string());
            }
            Err(e) => return Err(e.into()),
        }
        self.records.push(record);
        if self.cfg.auto_save && self.pending.is_some() {
            self.apply_command(frame_id, OperatorCommand::Save)?;
        }
        Ok(self.records.last().cloned())
    }

    /// Applies an operator command to the pending frame `frame_id`.
    ///
    /// `Quit` is accepted whatever the frame id; everything else must name
    /// the current pending frame.
    pub fn apply_command(&mut self, frame_id: u64, cmd: OperatorCommand) -> Result<CommandEffect, SessionError> {
        if cmd == OperatorCommand::Quit {
            return self.stop().map(|report| CommandEffect::Stopped { report });
        }
        if self.stopped.is_some() {
            return Err(SessionError::Stopped);
        }
        let pending_id = self.pending.as_ref().map(|p| p.frame_id);
        if pending_id != Some(frame_id) {
            return Err(SessionError::StaleFrame { requested: frame_id, pending: pending_id });
        }
        let pending = self.pending.as_mut().expect("checked above");
        match cmd {
            OperatorCommand::Save => {
                let boxes: Vec<NormalizedBox> = if self.cfg.class_map.is_single_class() {
                    pending.detections.iter().map(|d| d.bbox.with_class(self.cfg.active_class)).collect()
                } else {
                    pending.detections.iter().map(|d| d.bbox).collect()
                };
                let jpeg = encode_jpeg(&pending.image)?;
                let (image, label) = save_frame(&self.dir, frame_id, &jpeg, &serialize_labels(&boxes), self.fault.take())?;
                self.pending = None;
                self.record_mut(frame_id).disposition = Disposition::Saved;
                Ok(CommandEffect::Saved { image, label })
            }
            OperatorCommand::Skip => {
                self.pending = None;
                self.record_mut(frame_id).disposition = Disposition::Skipped;
                Ok(CommandEffect::Skipped)
            }
            OperatorCommand::SetClass { class_id } => {
                if !self.cfg.class_map.contains_id(class_id) {
                    return Err(SessionError::InvalidClass(class_id));
                }
                self.cfg.active_class = class_id;
                for d in &mut pending.detections {
                    d.bbox = d.bbox.with_class(class_id);
                }
                Ok(CommandEffect::ClassSet(class_id))
            }
            OperatorCommand::AdjustBox { index, cx, cy, w, h } => {
                let len = pending.detections.len();
                let d = pending.detections.get_mut(index).ok_or(SessionError::InvalidBoxIndex { index, len })?;
                d.bbox = adjusted(&d.bbox, cx, cy, w, h)?;
                Ok(CommandEffect::BoxesEdited(len))
            }
            OperatorCommand::DeleteBox { index } => {
                let len = pending.detections.len();
                if index >= len {
                    return Err(SessionError::InvalidBoxIndex { index, len });
                }
                pending.detections.remove(index);
                Ok(CommandEffect::BoxesEdited(len - 1))
            }
            OperatorCommand::Quit => unreachable!("handled above"),
        }
    }

    pub fn report(&self) -> SessionReport {
        let rows: Vec<LatencyRow> = self.records.iter().map(LatencyRow::from).collect();
        SessionReport { stats: SessionStats::from_rows(&rows), rows }
    }

    pub fn stats(&self) -> SessionStats {
        self.report().stats
    }

    /// Writes `session.csv` and `stats.json` and stops the session. Later
    /// calls return the same path without rewriting anything.
    pub fn stop(&mut self) -> Result<PathBuf, SessionError> {
        if let Some(path) = &self.stopped {
            return Ok(path.clone());
        }
        let report = self.report();
        let csv_path = self.dir.join(SESSION_CSV);
        fs::write(&csv_path, report.csv())?;
        let stats = serde_json::to_string_pretty(&report.stats).map_err(|e| SessionError::Persist(e.to_string()))?;
        fs::write(self.dir.join(STATS_FILE), stats + "\n")?;
        log::info!("session stopped after {} frames", report.stats.frames_processed);
        self.stopped = Some(csv_path.clone());
        Ok(csv_path)
    }
}
