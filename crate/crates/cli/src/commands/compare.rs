use std::fs;
use std::path::{Path, PathBuf};

use fieldlabel_core::stats::{
    box_summary_csv, compare_configs, comparison_csv, curves_csv, histogram_csv, ingest_training_log, parse_pairs,
    MetricName, MetricSeries, StatsError, TTestVariant, DEFAULT_ALPHA,
};

use crate::common::{invalid, require_file, require_output_file, runtime, write, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// A training log CSV, or a directory of them named `<config>.csv`.
    #[arg(long, value_name = "PATH")]
    logs: PathBuf,
    /// Pairs to test, one `config_a,config_b` per line.
    #[arg(long, value_name = "FILE")]
    pairs: PathBuf,
    /// map_50_95, precision, recall or f1.
    #[arg(long, default_value = "f1")]
    metric: MetricName,
    /// pooled (Student) or welch.
    #[arg(long, default_value = "pooled")]
    variant: TTestVariant,
    /// Significance level.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Result table `pair,metric,t,df,p,significant,direction`.
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Also write plot-ready `box_summary.csv`, `histogram.csv` and `curves.csv` here.
    #[arg(long, value_name = "DIR")]
    plots: Option<PathBuf>,
    /// Histogram bins for `--plots`.
    #[arg(long, default_value_t = 10)]
    bins: usize,
}

fn stats_error(e: StatsError) -> crate::common::CliError {
    invalid(e.to_string())
}

fn load_logs(path: &Path) -> CliResult<Vec<MetricSeries>> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| runtime(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        files
    } else {
        require_file(path, "--logs")?;
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(invalid(format!("no .csv logs in {}", path.display())));
    }
    let mut series = Vec::new();
    for file in files {
        let text = fs::read_to_string(&file).map_err(|e| runtime(format!("{}: {e}", file.display())))?;
        let config = file.file_stem().and_then(|s| s.to_str()).unwrap_or("default");
        let parsed = ingest_training_log(&text, config).map_err(|e| invalid(format!("{}: {e}", file.display())))?;
        series.extend(parsed);
    }
    Ok(series)
}

pub fn run(args: Args) -> CliResult<()> {
    require_file(&args.pairs, "--pairs")?;
    require_output_file(&args.out)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(invalid(format!("--alpha {} outside (0, 1)", args.alpha)));
    }
    if args.bins == 0 {
        return Err(invalid("--bins must be at least 1"));
    }
    let series = load_logs(&args.logs)?;
    let pairs_text = fs::read_to_string(&args.pairs).map_err(|e| runtime(format!("{}: {e}", args.pairs.display())))?;
    let pairs = parse_pairs(&pairs_text).map_err(stats_error)?;
    if pairs.is_empty() {
        return Err(invalid(format!("{} lists no pairs", args.pairs.display())));
    }
    let rows = compare_configs(&series, &pairs, args.metric, args.variant, args.alpha).map_err(stats_error)?;
    write(&args.out, comparison_csv(&rows))?;

    if let Some(unit) = rows.first().map(|r| r.unit) {
        println!("samples: {unit}; {:?} t-test, alpha {}", args.variant, args.alpha);
    }
    for r in &rows {
        let verdict = if r.result.significant { "significant" } else { "not significant" };
        println!("{} [{}]: {} ({verdict}, {})", r.pair(), r.metric, r.result.summary(), r.direction());
    }

    if let Some(dir) = &args.plots {
        let chosen: Vec<MetricSeries> = series.iter().filter(|s| s.metric == args.metric).cloned().collect();
        write(&dir.join("box_summary.csv"), box_summary_csv(&chosen).map_err(stats_error)?)?;
        write(&dir.join("histogram.csv"), histogram_csv(&chosen, args.bins).map_err(stats_error)?)?;
        write(&dir.join("curves.csv"), curves_csv(&series))?;
    }
    Ok(())
}
