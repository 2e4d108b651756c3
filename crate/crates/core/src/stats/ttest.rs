use serde::{Deserialize, Serialize};

use super::dist::student_t_sf;
use super::StatsError;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestVariant {
    /// Student's t with pooled variance, `df = n_a + n_b - 2`.
    #[default]
    Pooled,
    /// Welch's t with Welch–Satterthwaite degrees of freedom.
    Welch,
}

impl std::str::FromStr for TTestVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pooled" => Ok(Self::Pooled),
            "welch" => Ok(Self::Welch),
            other => Err(format!("unknown t-test variant {other:?} (expected pooled or welch)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub variant: TTestVariant,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// Two-sided.
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
}

/// Formats a p-value to four decimals, or `<0.0001` below that.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

impl TestResult {
    /// `t=2.5588, p=0.0113`
    pub fn summary(&self) -> String {
        format!("t={:.4}, p={}", self.t_statistic, format_p(self.p_value))
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Independent two-sample t-test, two-sided.
pub fn t_test(a: &[f64], b: &[f64], variant: TTestVariant, alpha: f64) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples { a: a.len(), b: b.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (se2, df) = match variant {
        TTestVariant::Pooled => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            (pooled * (1.0 / na + 1.0 / nb), na + nb - 2.0)
        }
        TTestVariant::Welch => {
            let (ua, ub) = (va / na, vb / nb);
            let se2 = ua + ub;
            (se2, se2 * se2 / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0)))
        }
    };
    if se2 <= 0.0 {
        return Err(StatsError::Degenerate);
    }
    let t = (ma - mb) / se2.sqrt();
    let p = (2.0 * student_t_sf(t.abs(), df)).min(1.0);
    Ok(TestResult { variant, t_statistic: t, degrees_of_freedom: df, p_value: p, alpha, significant: p < alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_zero_t() {
        let a = [0.3, 0.5, 0.4, 0.45];
        let r = t_test(&a, &a, TTestVariant::Pooled, DEFAULT_ALPHA).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn small_pooled_example() {
        let r = t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], TTestVariant::Pooled, DEFAULT_ALPHA).unwrap();
        assert!((r.t_statistic - -1.224745).abs() < 1e-6);
        assert_eq!(r.degrees_of_freedom, 4.0);
        assert!((r.p_value - 0.2879).abs() < 1e-3);
    }

    #[test]
    fn welch_degrees_of_freedom() {
        // Equal variances and sizes: Welch df equals the pooled df.
        let r = t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], TTestVariant::Welch, DEFAULT_ALPHA).unwrap();
        assert!((r.degrees_of_freedom - 4.0).abs() < 1e-12);
        // va = 1/3 (n=4), vb = 100 (n=3) -> df = (1/12+100/3)^2 / ((1/12)^2/3 + (100/3)^2/2)
        let a = [1.0, 1.5, 2.0, 1.5];
        let b = [0.0, 10.0, 20.0];
        let r = t_test(&a, &b, TTestVariant::Welch, DEFAULT_ALPHA).unwrap();
        let (ua, ub) = (1.0 / 6.0 / 4.0, 100.0 / 3.0);
        let df = (ua + ub) * (ua + ub) / (ua * ua / 3.0 + ub * ub / 2.0);
        assert!((r.degrees_of_freedom - df).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_too_small() {
        assert!(matches!(
            t_test(&[1.0, 1.0], &[1.0, 1.0, 1.0], TTestVariant::Pooled, 0.05),
            Err(StatsError::Degenerate)
        ));
        assert!(matches!(t_test(&[1.0], &[1.0, 2.0], TTestVariant::Pooled, 0.05), Err(StatsError::TooFewSamples { .. })));
        assert!(matches!(t_test(&[1.0, f64::NAN], &[1.0, 2.0], TTestVariant::Welch, 0.05), Err(StatsError::NonFinite)));
    }

    #[test]
    fn p_value_rendering() {
        let r = TestResult {
            variant: TTestVariant::Pooled,
            t_statistic: 2.5588,
            degrees_of_freedom: 198.0,
            p_value: 0.0113,
            alpha: DEFAULT_ALPHA,
            significant: 0.0113 < DEFAULT_ALPHA,
        };
        assert_eq!(r.summary(), "t=2.5588, p=0.0113");
        assert!(r.significant);
        assert_eq!(format_p(0.00009), "<0.0001");
        assert_eq!(format_p(0.0001), "0.0001");
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("welch".parse::<TTestVariant>(), Ok(TTestVariant::Welch));
        assert!("paired".parse::<TTestVariant>().is_err());
    }
}
