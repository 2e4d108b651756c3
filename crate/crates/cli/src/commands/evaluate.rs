use std::fs;
use std::path::{Path, PathBuf};

use fieldlabel_core::annotation::ClassMap;
use fieldlabel_core::eval::{evaluate, load_eval_dirs, EvalError, ImageEval};

use crate::common::{invalid, require_dir, require_output_dir, resolve_class_map, runtime, write, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Prediction files, `class cx cy w h conf` per line, one per image stem.
    #[arg(long, value_name = "DIR")]
    preds: PathBuf,
    /// Ground-truth label files.
    #[arg(long, value_name = "DIR")]
    gt: PathBuf,
    /// Report directory: `report.txt`, `report.json`, `ap.csv`, `pr.csv`.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Confidence threshold for the point precision/recall/F1.
    #[arg(long, default_value_t = 0.25)]
    conf: f64,
    /// Comma-separated class names (default: nearest `data.yaml`, else numeric ids).
    #[arg(long, value_name = "A,B,..", conflicts_with = "names")]
    classes: Option<String>,
    #[arg(long, value_name = "YAML")]
    names: Option<PathBuf>,
}

/// Highest class id used in any label or prediction file.
fn max_class_id(dirs: &[&Path]) -> CliResult<Option<u32>> {
    let mut max = None;
    for dir in dirs {
        for entry in fs::read_dir(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))? {
            let path = entry.map_err(runtime)?.path();
            if path.extension().is_none_or(|e| e != "txt") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            for line in text.lines() {
                if let Some(Ok(id)) = line.split_whitespace().next().map(str::parse::<u32>) {
                    max = max.max(Some(id));
                }
            }
        }
    }
    Ok(max)
}

pub fn run(args: Args) -> CliResult<()> {
    require_dir(&args.preds, "--preds")?;
    require_dir(&args.gt, "--gt")?;
    require_output_dir(&args.out)?;
    if !(0.0..=1.0).contains(&args.conf) {
        return Err(invalid(format!("--conf {} outside [0, 1]", args.conf)));
    }
    let search = [args.gt.clone(), args.gt.join(".."), args.gt.join("../..")];
    let class_map = match resolve_class_map(args.classes.as_deref(), args.names.as_deref(), &search)? {
        Some(map) => map,
        None => {
            let n = max_class_id(&[&args.gt, &args.preds])?.map_or(1, |m| m + 1);
            ClassMap::new((0..n).map(|i| i.to_string())).map_err(runtime)?
        }
    };
    let images: Vec<ImageEval> = load_eval_dirs(&args.preds, &args.gt, class_map.len())
        .map_err(|e| match e {
            EvalError::Io { .. } => runtime(e),
            _ => invalid(e.to_string()),
        })?
        .into_iter()
        .map(|(_, img)| img)
        .collect();
    let report = evaluate(&images, &class_map, args.conf).map_err(|e| invalid(e.to_string()))?;

    write(&args.out.join("report.txt"), report.to_text())?;
    write(&args.out.join("report.json"), serde_json::to_string_pretty(&report).map_err(runtime)? + "\n")?;
    write(&args.out.join("ap.csv"), report.ap_csv())?;
    write(&args.out.join("pr.csv"), report.pr_csv())?;
    let a = &report.aggregate;
    println!(
        "{} images: mAP@50-95 {:.4}  precision {:.4}  recall {:.4}  F1 {:.4}",
        images.len(),
        a.map_50_95,
        a.precision,
        a.recall,
        a.f1
    );
    Ok(())
}
