//! Significance testing and plot-ready summaries for comparing training
//! configurations.

mod compare;
mod dist;
mod logs;
mod summary;
mod ttest;

use std::fmt::Write as _;

use thiserror::Error;

pub use compare::{compare_configs, comparison_csv, parse_pairs, ComparisonRow};
pub use dist::{ln_beta, ln_gamma, reg_inc_beta, student_t_cdf, student_t_sf};
pub use logs::{ingest_training_log, MetricName, MetricSeries, SampleUnit};
pub use summary::{box_summary, histogram, quantile_sorted, BoxSummary, HistogramBin};
pub use ttest::{format_p, t_test, TTestVariant, TestResult, DEFAULT_ALPHA};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least 2 values per sample, got {a} and {b}")]
    TooFewSamples { a: usize, b: usize },
    #[error("non-finite value in sample")]
    NonFinite,
    #[error("both samples have zero variance; the statistic is undefined")]
    Degenerate,
    #[error("alpha {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("no values")]
    Empty,
    #[error("bin count must be at least 1")]
    InvalidBins,
    #[error("{0}")]
    Csv(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: column `{column}` is not a number: {value:?}")]
    NonNumeric { line: usize, column: String, value: String },
    #[error("line {line}: {config} index {found} does not follow {previous}")]
    NonMonotone { line: usize, config: String, previous: u32, found: u32 },
    #[error("unknown configuration {0:?}")]
    UnknownConfig(String),
    #[error("{0} and {1} use different sample units")]
    MixedUnits(String, String),
}

/// CSV `config,metric,count,median,q1,q3,iqr,whisker_low,whisker_high,outliers`
/// with outliers joined by `;`.
pub fn box_summary_csv(series: &[MetricSeries]) -> Result<String, StatsError> {
    let mut out = String::from("config,metric,count,median,q1,q3,iqr,whisker_low,whisker_high,outliers\n");
    for s in series {
        let b = box_summary(&s.values)?;
        let outliers: Vec<String> = b.outliers.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            s.config_id,
            s.metric,
            b.count,
            b.median,
            b.q1,
            b.q3,
            b.iqr,
            b.whisker_low,
            b.whisker_high,
            outliers.join(";")
        );
    }
    Ok(out)
}

/// CSV `config,metric,bin_low,bin_high,count`.
pub fn histogram_csv(series: &[MetricSeries], bins: usize) -> Result<String, StatsError> {
    let mut out = String::from("config,metric,bin_low,bin_high,count\n");
    for s in series {
        for b in histogram(&s.values, bins)? {
            let _ = writeln!(out, "{},{},{:.6},{:.6},{}", s.config_id, s.metric, b.low, b.high, b.count);
        }
    }
    Ok(out)
}

/// CSV `config,metric,index,value` for epoch curves.
pub fn curves_csv(series: &[MetricSeries]) -> String {
    let mut out = String::from("config,metric,index,value\n");
    for s in series {
        for (i, v) in s.index.iter().zip(&s.values) {
            let _ = writeln!(out, "{},{},{i},{v:.6}", s.config_id, s.metric);
        }
    }
    out
}
