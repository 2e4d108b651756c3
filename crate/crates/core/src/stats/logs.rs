use std::fmt;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Map5095,
    Precision,
    Recall,
    F1,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [MetricName::Map5095, MetricName::Precision, MetricName::Recall, MetricName::F1];

    pub fn column(self) -> &'static str {
        match self {
            MetricName::Map5095 => "map_50_95",
            MetricName::Precision => "precision",
            MetricName::Recall => "recall",
            MetricName::F1 => "f1",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl std::str::FromStr for MetricName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.column() == s)
            .ok_or_else(|| format!("unknown metric {s:?} (expected map_50_95, precision, recall or f1)"))
    }
}

/// What one value in a series stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleUnit {
    /// One value per training epoch of a single run (`epoch` column).
    Epoch,
    /// One value per independent run (`run` column).
    Run,
}

impl fmt::Display for SampleUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleUnit::Epoch => "per-epoch values",
            SampleUnit::Run => "per-run replicates",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub config_id: String,
    pub metric: MetricName,
    pub unit: SampleUnit,
    /// Epoch or run index per value.
    pub index: Vec<u32>,
    pub values: Vec<f64>,
}

/// Reads a training log with header `epoch,map_50_95,precision,recall,f1`
/// (or `run` in place of `epoch`), columns in any order.
///
/// An optional `config` column splits the rows by configuration; without
/// it every row belongs to `default_config`. The index column must be
/// strictly increasing within each configuration. Returns one series per
/// configuration and metric, configurations in order of first appearance.
pub fn ingest_training_log(csv_text: &str, default_config: &str) -> Result<Vec<MetricSeries>, StatsError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    let headers = reader.headers().map_err(|e| StatsError::Csv(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (index_col, unit) = match (find("epoch"), find("run")) {
        (Some(c), _) => (c, SampleUnit::Epoch),
        (None, Some(c)) => (c, SampleUnit::Run),
        (None, None) => return Err(StatsError::MissingColumn("epoch".into())),
    };
    let metric_cols: Vec<(MetricName, usize)> = MetricName::ALL
        .into_iter()
        .map(|m| find(m.column()).map(|c| (m, c)).ok_or_else(|| StatsError::MissingColumn(m.column().into())))
        .collect::<Result<_, _>>()?;
    let config_col = find("config");

    struct Group {
        config: String,
        index: Vec<u32>,
        values: Vec<Vec<f64>>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| StatsError::Csv(e.to_string()))?;
        let cell = |col: usize| record.get(col).unwrap_or("");
        let config = config_col.map_or(default_config, |c| cell(c)).to_string();
        let index: u32 = cell(index_col).parse().map_err(|_| StatsError::NonNumeric {
            line,
            column: headers[index_col].to_string(),
            value: cell(index_col).to_string(),
        })?;
        let group = match groups.iter().position(|g| g.config == config) {
            Some(i) => &mut groups[i],
            None => {
                groups.push(Group { config: config.clone(), index: Vec::new(), values: vec![Vec::new(); 4] });
                groups.last_mut().expect("just pushed")
            }
        };
        if let Some(&prev) = group.index.last() {
            if index <= prev {
                return Err(StatsError::NonMonotone { line, config, previous: prev, found: index });
            }
        }
        group.index.push(index);
        for (k, (metric, col)) in metric_cols.iter().enumerate() {
            let v: f64 = cell(*col).parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| StatsError::NonNumeric {
                line,
                column: metric.column().to_string(),
                value: cell(*col).to_string(),
            })?;
            group.values[k].push(v);
        }
    }
    if groups.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(groups
        .into_iter()
        .flat_map(|g| {
            let Group { config, index, values } = g;
            MetricName::ALL.into_iter().zip(values).map(move |(metric, values)| MetricSeries {
                config_id: config.clone(),
                metric,
                unit,
                index: index.clone(),
                values,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(epochs: impl Iterator<Item = u32>) -> String {
        let mut s = String::from("epoch,map_50_95,precision,recall,f1\n");
        for e in epochs {
            let v = e as f64 / 200.0;
            s.push_str(&format!("{e},{v},{v},{v},{v}\n"));
        }
        s
    }

    #[test]
    fn hundred_epochs() {
        let series = ingest_training_log(&log(1..=100), "v8-SP").unwrap();
        assert_eq!(series.len(), 4);
        assert!(series.iter().all(|s| s.values.len() == 100 && s.config_id == "v8-SP" && s.unit == SampleUnit::Epoch));
        assert_eq!(series[3].metric, MetricName::F1);
        assert_eq!(series[0].values[99], 0.5);
    }

    #[test]
    fn empty_body_is_error() {
        assert!(matches!(ingest_training_log(&log(0..0), "x"), Err(StatsError::Empty)));
    }

    #[test]
    fn shuffled_epochs_rejected() {
        let err = ingest_training_log(&log([1, 3, 2].into_iter()), "x").unwrap_err();
        assert!(matches!(err, StatsError::NonMonotone { line: 4, previous: 3, found: 2, .. }));
    }

    #[test]
    fn missing_column_and_bad_cell() {
        let err = ingest_training_log("epoch,precision,recall,f1\n1,0.1,0.1,0.1\n", "x").unwrap_err();
        assert!(matches!(err, StatsError::MissingColumn(ref c) if c == "map_50_95"));
        let err = ingest_training_log("epoch,map_50_95,precision,recall,f1\n1,0.1,n/a,0.1,0.1\n", "x").unwrap_err();
        assert!(matches!(err, StatsError::NonNumeric { line: 2, ref column, .. } if column == "precision"));
    }

    #[test]
    fn config_column_and_run_unit() {
        let text = "config,run,f1,recall,precision,map_50_95\nA,1,0.5,0,0,0\nB,1,0.6,0,0,0\nA,2,0.7,0,0,0\n";
        let series = ingest_training_log(text, "ignored").unwrap();
        assert_eq!(series.len(), 8);
        let f1_a = series.iter().find(|s| s.config_id == "A" && s.metric == MetricName::F1).unwrap();
        assert_eq!(f1_a.values, vec![0.5, 0.7]);
        assert_eq!(f1_a.unit, SampleUnit::Run);
        assert_eq!(series[4].config_id, "B");
    }
}
