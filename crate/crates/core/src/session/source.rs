use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::prep::IMAGE_EXTENSIONS;

/// One captured frame before any resizing.
#[derive(Debug, Clone)]
pub struct SourceFrame {
    pub image: RgbImage,
    /// File stem or a synthetic name for live frames.
    pub name: String,
    pub captured: Instant,
}

pub trait FrameSource: Send {
    /// Next frame, or `None` once the source is exhausted or closed.
    fn next_frame(&mut self) -> Result<Option<SourceFrame>, SessionError>;

    /// Total frame count when known up front.
    fn len_hint(&self) -> Option<usize> {
        None
    }

    /// Live sources drop stale frames; replay sources never do.
    fn is_live(&self) -> bool {
        false
    }
}

/// Where frames come from, as written on the command line and in the
/// session manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "path", rename_all = "snake_case")]
pub enum SourceSpec {
    Camera(Option<String>),
    Directory(PathBuf),
    /// A playlist file listing frame images in order, one path per line,
    /// relative paths resolved against the playlist's directory.
    Video(PathBuf),
    /// Frames pushed by the embedding process through a [`LiveFeed`].
    Live,
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Camera(None) => f.write_str("camera"),
            SourceSpec::Camera(Some(dev)) => write!(f, "camera:{dev}"),
            SourceSpec::Directory(p) => write!(f, "dir:{}", p.display()),
            SourceSpec::Video(p) => write!(f, "video:{}", p.display()),
            SourceSpec::Live => f.write_str("live"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = String;

    /// `camera[:device]`, `dir:<path>`, `video:<playlist>`, or a bare path
    /// (a directory or a playlist file, decided by what exists on disk).
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "camera" {
            return Ok(SourceSpec::Camera(None));
        }
        if let Some(dev) = s.strip_prefix("camera:") {
            return Ok(SourceSpec::Camera(Some(dev.to_string())));
        }
        if let Some(p) = s.strip_prefix("dir:") {
            return Ok(SourceSpec::Directory(p.into()));
        }
        if let Some(p) = s.strip_prefix("video:") {
            return Ok(SourceSpec::Video(p.into()));
        }
        if s.is_empty() {
            return Err("empty source".into());
        }
        let path = PathBuf::from(s);
        Ok(if path.is_file() { SourceSpec::Video(path) } else { SourceSpec::Directory(path) })
    }
}

impl SourceSpec {
    /// Opens a file-backed or camera source. `Live` sources are created with
    /// [`live_source`] instead since they need a producer handle.
    pub fn open(&self) -> Result<Box<dyn FrameSource>, SessionError> {
        match self {
            SourceSpec::Camera(dev) => Err(SessionError::SourceUnavailable(format!(
                "camera {}: no capture driver is built in; push frames through a live feed instead",
                dev.as_deref().unwrap_or("default")
            ))),
            SourceSpec::Directory(p) => Ok(Box::new(DirectorySource::open(p)?)),
            SourceSpec::Video(p) => Ok(Box::new(DirectorySource::playlist(p)?)),
            SourceSpec::Live => Err(SessionError::SourceUnavailable("live source needs a feed handle".into())),
        }
    }
}

/// Replays image files in a fixed order. Used for both directories and
/// playlist files.
#[derive(Debug)]
pub struct DirectorySource {
    paths: Vec<PathBuf>,
    next: usize,
}

impl DirectorySource {
    /// All images directly inside `dir`, sorted by file name.
    pub fn open(dir: &Path) -> Result<Self, SessionError> {
        let entries = fs::read_dir(dir)
            .map_err(|e| SessionError::SourceUnavailable(format!("{}: {e}", dir.display())))?;
        let mut paths = Vec::new();
        for entry in entries {
            let path = entry?.path();
            let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
            if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
                paths.push(path);
            }
        }
        paths.sort();
        Ok(Self { paths, next: 0 })
    }

    pub fn playlist(file: &Path) -> Result<Self, SessionError> {
        let text = fs::read_to_string(file)
            .map_err(|e| SessionError::SourceUnavailable(format!("{}: {e}", file.display())))?;
        let base = file.parent().unwrap_or(Path::new("."));
        let paths = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect();
        Ok(Self { paths, next: 0 })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

impl FrameSource for DirectorySource {
    fn next_frame(&mut self) -> Result<Option<SourceFrame>, SessionError> {
        let Some(path) = self.paths.get(self.next) else {
            return Ok(None);
        };
        self.next += 1;
        let image = image::open(path)
            .map_err(|e| SessionError::SourceUnavailable(format!("{}: {e}", path.display())))?
            .to_rgb8();
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("frame").to_string();
        Ok(Some(SourceFrame { image, name, captured: Instant::now() }))
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.paths.len())
    }
}

#[derive(Default)]
struct Slot {
    frame: Option<SourceFrame>,
    closed: bool,
    pushed: u64,
    dropped: u64,
}

/// Producer side of a live source. A pushed frame replaces any frame the
/// consumer has not taken yet, so inference always sees the newest one.
#[derive(Clone)]
pub struct LiveFeed {
    shared: Arc<(Mutex<Slot>, Condvar)>,
}

impl LiveFeed {
    pub fn push(&self, image: RgbImage) {
        let (lock, cv) = &*self.shared;
        let mut slot = lock.lock().expect("live slot poisoned");
        if slot.closed {
            return;
        }
        slot.pushed += 1;
        let name = format!("live_{}", slot.pushed);
        if slot.frame.replace(SourceFrame { image, name, captured: Instant::now() }).is_some() {
            slot.dropped += 1;
        }
        cv.notify_one();
    }

    /// Ends the stream once the pending frame (if any) is consumed.
    pub fn close(&self) {
        let (lock, cv) = &*self.shared;
        lock.lock().expect("live slot poisoned").closed = true;
        cv.notify_all();
    }

    /// Frames replaced before the consumer took them.
    pub fn dropped(&self) -> u64 {
        self.shared.0.lock().expect("live slot poisoned").dropped
    }
}

pub struct LiveSource {
    shared: Arc<(Mutex<Slot>, Condvar)>,
}

/// A connected producer/consumer pair with a single-frame slot.
pub fn live_source() -> (LiveFeed, LiveSource) {
    let shared = Arc::new((Mutex::new(Slot::default()), Condvar::new()));
    (LiveFeed { shared: shared.clone() }, LiveSource { shared })
}

impl FrameSource for LiveSource {
    fn next_frame(&mut self) -> Result<Option<SourceFrame>, SessionError> {
        let (lock, cv) = &*self.shared;
        let mut slot = lock.lock().expect("live slot poisoned");
        loop {
            if let Some(frame) = slot.frame.take() {
                return Ok(Some(frame));
            }
            if slot.closed {
                return Ok(None);
            }
            slot = cv.wait(slot).expect("live slot poisoned");
        }
    }

    fn is_live(&self) -> bool {
        true
    }
}
