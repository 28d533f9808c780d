//! Summary statistics and the paired tests used to compare ensembles.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{param, Result};

/// Left-to-right mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); `0` for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Mean of the last `⌈fraction·len⌉` entries (at least one).
pub fn tail_mean(series: &[f64], fraction: f64) -> f64 {
    let n = ((series.len() as f64 * fraction).ceil() as usize).clamp(1, series.len().max(1));
    mean(&series[series.len().saturating_sub(n)..])
}

/// Least-squares slope of `ys` against `0, 1, 2, …`.
pub fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let xbar = (n - 1.0) / 2.0;
    let ybar = mean(ys);
    let (num, den) = ys.iter().enumerate().fold((0.0, 0.0), |(num, den), (i, y)| {
        let dx = i as f64 - xbar;
        (num + dx * (y - ybar), den + dx * dx)
    });
    num / den
}

/// Paired t-test on `a − b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    pub std_err: f64,
    pub t: f64,
    /// One-sided p-value for `mean(a − b) > 0`.
    pub p_greater: f64,
    /// One-sided p-value for `mean(a − b) < 0`.
    pub p_less: f64,
}

impl PairedTest {
    /// `a` significantly exceeds `b`.
    pub fn greater(&self, alpha: f64) -> bool {
        self.p_greater < alpha
    }

    /// `a` is not significantly below `b`.
    pub fn not_less(&self, alpha: f64) -> bool {
        self.p_less >= alpha
    }

    pub fn p_two_sided(&self) -> f64 {
        (2.0 * self.p_greater.min(self.p_less)).min(1.0)
    }
}

pub fn paired_t(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() {
        return Err(param(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    one_sample_t(&d)
}

/// t-test of `mean(d) = 0`.
pub fn one_sample_t(d: &[f64]) -> Result<PairedTest> {
    let n = d.len();
    if n < 2 {
        return Err(param("a t-test needs at least two samples"));
    }
    let mean_diff = mean(d);
    let std_err = sample_std(d) / (n as f64).sqrt();
    let (t, p_greater, p_less) = if std_err > 0.0 {
        let t = mean_diff / std_err;
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| param(e.to_string()))?;
        let lower = dist.cdf(t);
        (t, 1.0 - lower, lower)
    } else if mean_diff > 0.0 {
        (f64::INFINITY, 0.0, 1.0)
    } else if mean_diff < 0.0 {
        (f64::NEG_INFINITY, 1.0, 0.0)
    } else {
        (0.0, 1.0, 1.0)
    };
    Ok(PairedTest { n, mean_diff, std_err, t, p_greater, p_less })
}
