use serde::Serialize;

use super::StatsError;

/// Quantile by linear interpolation between order statistics
/// (`h = (n - 1) p`; the "inclusive" rule, numpy's default). `sorted` must
/// be non-empty and ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSummary {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    /// Smallest datum at or above `q1 - 1.5 iqr`.
    pub whisker_low: f64,
    /// Largest datum at or below `q3 + 1.5 iqr`.
    pub whisker_high: f64,
    /// Data beyond the whiskers, ascending.
    pub outliers: Vec<f64>,
}

pub fn box_summary(values: &[f64]) -> Result<BoxSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || sorted.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence);
    let whisker_low = inside().next().unwrap_or(q1);
    let whisker_high = inside().last().unwrap_or(q3);
    let outliers = sorted.iter().copied().filter(|v| *v < lo_fence || *v > hi_fence).collect();
    Ok(BoxSummary { count: sorted.len(), median, q1, q3, iqr, whisker_low, whisker_high, outliers })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Equal-width bins over `[min, max]`, each right-open except the last.
/// When every value is equal there is a single zero-width bin.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<Vec<HistogramBin>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if bin_count == 0 {
        return Err(StatsError::InvalidBins);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(vec![HistogramBin { low: min, high: max, count: values.len() }]);
    }
    let width = (max - min) / bin_count as f64;
    let edge = |i: usize| if i == bin_count { max } else { min + width * i as f64 };
    let mut bins: Vec<HistogramBin> =
        (0..bin_count).map(|i| HistogramBin { low: edge(i), high: edge(i + 1), count: 0 }).collect();
    for &v in values {
        let mut i = (((v - min) / width) as usize).min(bin_count - 1);
        while i + 1 < bin_count && v >= edge(i + 1) {
            i += 1;
        }
        while i > 0 && v < edge(i) {
            i -= 1;
        }
        bins[i].count += 1;
    }
    Ok(bins)
}
