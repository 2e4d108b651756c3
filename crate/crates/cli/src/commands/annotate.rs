use std::io::{self, BufRead, Write as _};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use fieldlabel_core::annotation::ClassMap;
use fieldlabel_core::detect::{Backend, MockBackend, MockScript, ProcessBackend};
use fieldlabel_core::session::{CommandEffect, OperatorCommand, Outcome, Session, SessionConfig, SessionError, SourceSpec};
use fieldlabel_gateway::Gateway;

use crate::common::{invalid, parse_size, require_output_dir, runtime, CliError, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// `camera[:device]`, `dir:<path>`, `video:<playlist>`, or a path.
    #[arg(long, value_name = "SOURCE")]
    source: SourceSpec,
    /// `mock:<script>` or `process:<program>`.
    #[arg(long, value_name = "BACKEND")]
    backend: String,
    /// Extra argument passed to a process backend before the model path (repeatable).
    #[arg(long = "backend-arg", value_name = "ARG", allow_hyphen_values = true)]
    backend_args: Vec<String>,
    /// Exported model artifact for a process backend.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Label recorded in the manifest and used by `report`.
    #[arg(long, value_name = "LABEL")]
    model_label: Option<String>,
    /// Sessions are created as timestamped directories below this.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Comma-separated class names for a multi-class session.
    #[arg(long, value_name = "A,B,..")]
    classes: Option<String>,
    /// Class name for a single-class session.
    #[arg(long, default_value = "Plant", conflicts_with = "classes")]
    name: String,
    /// Class id used for saved boxes until changed.
    #[arg(long, default_value_t = 0)]
    active_class: u32,
    /// Detector input size.
    #[arg(long, default_value = "640x640", value_name = "WxH", value_parser = parse_size)]
    input: (u32, u32),
    #[arg(long, default_value_t = 0.25)]
    conf: f64,
    #[arg(long, default_value_t = 0.45)]
    iou: f64,
    /// Per-frame inference deadline; late frames are recorded as errors.
    #[arg(long, value_name = "MS")]
    deadline_ms: Option<u64>,
    /// Save every frame without asking.
    #[arg(long)]
    auto_save: bool,
    /// Serve the session to a browser at this address instead of the terminal.
    #[arg(long, value_name = "ADDR")]
    serve: Option<SocketAddr>,
}

fn session_error(e: SessionError) -> CliError {
    match e {
        SessionError::SourceUnavailable(_)
        | SessionError::OutputNotWritable(..)
        | SessionError::Config(_)
        | SessionError::InvalidClass(_) => invalid(e.to_string()),
        _ => runtime(e),
    }
}

fn build_backend(args: &Args, class_count: usize) -> CliResult<Box<dyn Backend>> {
    let (kind, target) = args
        .backend
        .split_once(':')
        .ok_or_else(|| invalid(format!("--backend {:?}: expected mock:<script> or process:<program>", args.backend)))?;
    match kind {
        "mock" => {
            let text = std::fs::read_to_string(target).map_err(|e| invalid(format!("{target}: {e}")))?;
            let script = MockScript::parse(&text, class_count).map_err(|e| invalid(format!("{target}: {e}")))?;
            Ok(Box::new(MockBackend::new(script, args.input)))
        }
        "process" => {
            let model = args.model.clone().ok_or_else(|| invalid("a process backend needs --model"))?;
            let label = args.model_label.clone().unwrap_or_else(|| {
                model.file_stem().and_then(|s| s.to_str()).unwrap_or("model").to_string()
            });
            let backend = ProcessBackend::new(target, args.backend_args.clone(), model, label, args.input, class_count)
                .map_err(|e| invalid(e.to_string()))?;
            Ok(Box::new(backend))
        }
        other => Err(invalid(format!("unknown backend kind {other:?}"))),
    }
}

fn describe(session: &Session, class_map: &ClassMap) -> String {
    let Some(p) = session.pending() else { return String::new() };
    let mut out = String::new();
    for (i, d) in p.detections.iter().enumerate() {
        let b = &d.bbox;
        let name = class_map.name(b.class_id()).unwrap_or("?");
        out.push_str(&format!(
            "  [{i}] {name} {:.3} at ({:.3}, {:.3}) size {:.3}x{:.3}\n",
            d.confidence,
            b.cx(),
            b.cy(),
            b.w(),
            b.h()
        ));
    }
    out
}

/// Terminal loop: one line of input per command.
fn run_local(session: &mut Session) -> CliResult<()> {
    let class_map = session.config().class_map.clone();
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    'frames: loop {
        let Some(rec) = session.process_next().map_err(session_error)? else {
            println!("end of stream");
            break;
        };
        match rec.outcome {
            Outcome::Error => {
                println!("frame {}: {}", rec.frame_id, rec.error.as_deref().unwrap_or("error"));
                continue;
            }
            _ => println!(
                "frame {} ({}): {} detection(s) in {:.1} ms",
                rec.frame_id,
                rec.source_name,
                rec.detections.len(),
                rec.inference_latency_ms
            ),
        }
        while let Some(frame_id) = session.pending().map(|p| p.frame_id) {
            print!("{}Enter=save s=skip 0-9=class d=delete first box q=quit > ", describe(session, &class_map));
            io::stdout().flush().map_err(runtime)?;
            let line = match lines.next() {
                Some(line) => line.map_err(runtime)?,
                None => "q".to_string(),
            };
            let Some(cmd) = OperatorCommand::from_key(&line, 0) else {
                println!("unrecognised key {:?}", line.trim());
                continue;
            };
            match session.apply_command(frame_id, cmd) {
                Ok(CommandEffect::Stopped { .. }) => break 'frames,
                Ok(CommandEffect::Saved { label, .. }) => println!("saved {}", label.display()),
                Ok(_) => {}
                Err(e) => println!("rejected: {e}"),
            }
        }
    }
    Ok(())
}

fn run_served(session: Session, addr: SocketAddr) -> CliResult<PathBuf> {
    let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
    rt.block_on(async move {
        let gateway = Gateway::serve(session, addr).await.map_err(|e| invalid(e.to_string()))?;
        println!("serving on ws://{}/stream (status: GET /status, stop: POST /stop)", gateway.local_addr());
        gateway.stopped().await;
        // Give the operator connection a moment to receive its final stats.
        tokio::time::sleep(Duration::from_millis(100)).await;
        gateway.shutdown().await.map_err(runtime)
    })
}

pub fn run(args: Args) -> CliResult<()> {
    require_output_dir(&args.out)?;
    let class_map = match &args.classes {
        Some(list) => ClassMap::new(list.split(',').map(str::trim)).map_err(|e| invalid(format!("--classes: {e}")))?,
        None => ClassMap::single(args.name.clone()),
    };
    let backend = build_backend(&args, class_map.len())?;
    let mut cfg = SessionConfig::new(args.source.clone(), args.out.clone(), class_map);
    cfg.active_class = args.active_class;
    cfg.auto_save = args.auto_save;
    cfg.detector.confidence_threshold = args.conf;
    cfg.detector.nms_iou_threshold = args.iou;
    cfg.detector.backend_id = backend.descriptor().id.clone();
    cfg.detector.model_path = args.model.clone();
    cfg.detector.input_size = args.input;
    cfg.detector.deadline = args.deadline_ms.map(Duration::from_millis);
    let mut session = Session::start(cfg, backend).map_err(session_error)?;
    println!("session directory {}", session.dir().display());

    let report = match args.serve {
        Some(addr) => run_served(session, addr)?,
        None => {
            run_local(&mut session)?;
            let path = session.stop().map_err(session_error)?;
            print!("{}", session.stats().to_text());
            path
        }
    };
    println!("latency records written to {}", report.display());
    Ok(())
}
