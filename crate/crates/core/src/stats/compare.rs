use std::fmt::Write as _;

use serde::Serialize;

use super::logs::{MetricName, MetricSeries, SampleUnit};
use super::ttest::{format_p, t_test, TTestVariant, TestResult};
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub config_a: String,
    pub config_b: String,
    pub metric: MetricName,
    pub unit: SampleUnit,
    pub mean_a: f64,
    pub mean_b: f64,
    pub result: TestResult,
}

impl ComparisonRow {
    pub fn pair(&self) -> String {
        format!("{} vs {}", self.config_a, self.config_b)
    }

    /// `A>B`, `B>A`, or `A=B` by sample mean.
    pub fn direction(&self) -> String {
        let (a, b) = (&self.config_a, &self.config_b);
        if self.mean_a > self.mean_b {
            format!("{a}>{b}")
        } else if self.mean_b > self.mean_a {
            format!("{b}>{a}")
        } else {
            format!("{a}={b}")
        }
    }
}

/// Parses a pairs file: one `config_a,config_b` per line, `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, StatsError> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then_some((i + 1, line))
        })
        .map(|(line, content)| {
            let parts: Vec<&str> = content.split(',').map(str::trim).collect();
            match parts[..] {
                [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
                _ => Err(StatsError::Csv(format!("pairs line {line}: expected `config_a,config_b`"))),
            }
        })
        .collect()
}

fn lookup<'a>(series: &'a [MetricSeries], config: &str, metric: MetricName) -> Result<&'a MetricSeries, StatsError> {
    series
        .iter()
        .find(|s| s.config_id == config && s.metric == metric)
        .ok_or_else(|| StatsError::UnknownConfig(config.to_string()))
}

/// One t-test per pair, rows in the order of `pairs`.
pub fn compare_configs(
    series: &[MetricSeries],
    pairs: &[(String, String)],
    metric: MetricName,
    variant: TTestVariant,
    alpha: f64,
) -> Result<Vec<ComparisonRow>, StatsError> {
    pairs
        .iter()
        .map(|(a, b)| {
            let sa = lookup(series, a, metric)?;
            let sb = lookup(series, b, metric)?;
            if sa.unit != sb.unit {
                return Err(StatsError::MixedUnits(a.clone(), b.clone()));
            }
            let result = t_test(&sa.values, &sb.values, variant, alpha)?;
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            Ok(ComparisonRow {
                config_a: a.clone(),
                config_b: b.clone(),
                metric,
                unit: sa.unit,
                mean_a: mean(&sa.values),
                mean_b: mean(&sb.values),
                result,
            })
        })
        .collect()
}

/// CSV `pair,metric,t,df,p,significant,direction`.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("pair,metric,t,df,p,significant,direction\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.4},{},{},{}",
            r.pair(),
            r.metric,
            r.result.t_statistic,
            r.result.degrees_of_freedom,
            format_p(r.result.p_value),
            r.result.significant,
            r.direction()
        );
    }
    out
}
