//! Adapter that runs an exported model through an external command.
//!
//! For each frame the backend writes a PNG to a scratch file and runs
//! `<program> [args..] <model_path> <image_path>`. The command prints one
//! raw detection per line on stdout, `class cx cy w h conf`, normalized to
//! the image it was given. This keeps the inference runtime (ONNX Runtime,
//! TensorRT, an Ultralytics script) outside this crate.

use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use image::RgbImage;

use super::backend::{Backend, BackendDescriptor, DetectError};
use super::detection::{parse_prediction_file, Detection};

static SCRATCH_COUNTER: AtomicU64 = AtomicU64::new(0);

pub struct ProcessBackend {
    descriptor: BackendDescriptor,
    program: PathBuf,
    args: Vec<String>,
    model_path: PathBuf,
    class_count: usize,
    scratch: PathBuf,
}

impl ProcessBackend {
    pub fn new(
        program: impl Into<PathBuf>,
        args: Vec<String>,
        model_path: impl Into<PathBuf>,
        model_label: impl Into<String>,
        input_size: (u32, u32),
        class_count: usize,
    ) -> Result<Self, DetectError> {
        let program = program.into();
        let model_path = model_path.into();
        if !model_path.exists() {
            return Err(DetectError::Unavailable(format!("model artifact {} not found", model_path.display())));
        }
        let scratch = std::env::temp_dir().join(format!(
            "fieldlabel-{}-{}.png",
            std::process::id(),
            SCRATCH_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        Ok(Self {
            descriptor: BackendDescriptor {
                id: format!("process:{}", program.display()),
                model_label: model_label.into(),
                expected_input: (input_size.0, input_size.1, 3),
            },
            program,
            args,
            model_path,
            class_count,
            scratch,
        })
    }
}

impl Drop for ProcessBackend {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.scratch);
    }
}

impl Backend for ProcessBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn infer(&mut self, frame: &RgbImage, deadline: Option<Duration>) -> Result<Vec<Detection>, DetectError> {
        frame
            .save(&self.scratch)
            .map_err(|e| DetectError::Inference(format!("writing scratch frame: {e}")))?;
        let start = Instant::now();
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(&self.model_path)
            .arg(&self.scratch)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| DetectError::Unavailable(format!("{}: {e}", self.program.display())))?;

        // Drain stdout on a helper thread so a chatty model cannot block on
        // a full pipe while we poll for exit.
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = String::new();
            stdout.read_to_string(&mut buf).map(|_| buf)
        });

        let status = loop {
            if let Some(status) = child.try_wait().map_err(|e| DetectError::Inference(e.to_string()))? {
                break status;
            }
            if deadline.is_some_and(|d| start.elapsed() > d) {
                let _ = child.kill();
                let _ = child.wait();
                return Err(DetectError::Timeout { elapsed: start.elapsed() });
            }
            thread::sleep(Duration::from_millis(1));
        };
        let out = reader
            .join()
            .map_err(|_| DetectError::Inference("stdout reader panicked".into()))?
            .map_err(|e| DetectError::Inference(e.to_string()))?;
        if !status.success() {
            let mut err = String::new();
            if let Some(mut stderr) = child.stderr.take() {
                let _ = stderr.read_to_string(&mut err);
            }
            return Err(DetectError::Inference(format!("{status}: {}", err.trim())));
        }
        parse_prediction_file(&out, self.class_count).map_err(|e| DetectError::Inference(format!("model output {e}")))
    }
}
