use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fieldlabel_core::session::{parse_latency_csv, LatencyRow, SessionStats, MANIFEST_FILE, SESSION_CSV};

use crate::common::{invalid, require_dir, require_output_file, write, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Session directory (repeat to compare models).
    #[arg(long = "session", value_name = "DIR", required = true)]
    sessions: Vec<PathBuf>,
    /// Violin-plot data `model,frame_id,outcome,latency_ms,disposition`.
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

/// The backend's model label from the manifest, else the directory name.
fn model_label(dir: &Path) -> String {
    let from_manifest = fs::read_to_string(dir.join(MANIFEST_FILE))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| v["backend"]["model_label"].as_str().map(str::to_string));
    from_manifest.unwrap_or_else(|| dir.file_name().and_then(|n| n.to_str()).unwrap_or("session").to_string())
}

pub fn run(args: Args) -> CliResult<()> {
    require_output_file(&args.out)?;
    let mut loaded: Vec<(String, Vec<LatencyRow>)> = Vec::new();
    for dir in &args.sessions {
        require_dir(dir, "--session")?;
        let csv_path = dir.join(SESSION_CSV);
        let text = fs::read_to_string(&csv_path)
            .map_err(|e| invalid(format!("{}: {e} (was the session stopped?)", csv_path.display())))?;
        let rows = parse_latency_csv(&text).map_err(|e| invalid(format!("{}: {e}", csv_path.display())))?;
        loaded.push((model_label(dir), rows));
    }
    // Keep labels distinct when two sessions used the same model.
    let mut seen = HashSet::new();
    for (i, (label, _)) in loaded.iter_mut().enumerate() {
        if !seen.insert(label.clone()) {
            let dir_name = args.sessions[i].file_name().and_then(|n| n.to_str()).unwrap_or("session");
            *label = format!("{label}@{dir_name}");
            seen.insert(label.clone());
        }
    }

    let mut csv = String::from("model,frame_id,outcome,latency_ms,disposition\n");
    for (label, rows) in &loaded {
        for r in rows {
            let _ = writeln!(csv, "{label},{},{},{:.3},{}", r.frame_id, r.outcome, r.latency_ms, r.disposition);
        }
    }
    write(&args.out, csv)?;

    for (label, rows) in &loaded {
        let stats = SessionStats::from_rows(rows);
        println!("== {label}");
        print!("{}", stats.to_text());
    }
    Ok(())
}
