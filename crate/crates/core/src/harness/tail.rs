//! Empirical tail probabilities with Wilson intervals.

use crate::cmbounds::TailBoundCurve;
use crate::stats::{mean_and_variance, wilson_interval, Z95};
use crate::{Error, Result};
use serde::Serialize;

/// How a statistic is compared against `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TailMode {
    /// `value >= offset + r`.
    OneSided { offset: f64 },
    /// `|value - sample mean| >= r`.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailPoint {
    pub r: f64,
    pub empirical_p: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Raw bound value; may exceed 1.
    pub bound: f64,
    pub exceed_count: u64,
}

impl TailPoint {
    /// The Wilson lower limit exceeds the bound clamped at 1.
    pub fn violates_bound(&self) -> bool {
        self.wilson_low > self.bound.min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailCurveEstimate {
    pub mode: TailMode,
    /// Offset actually applied (the sample mean for two-sided runs).
    pub offset: f64,
    pub replicas: u64,
    pub points: Vec<TailPoint>,
}

impl TailCurveEstimate {
    pub fn violations(&self) -> impl Iterator<Item = &TailPoint> {
        self.points.iter().filter(|p| p.violates_bound())
    }
}

pub fn estimate_tail_curve(
    statistics: &[f64],
    r_grid: &[f64],
    mode: TailMode,
    bound: &TailBoundCurve,
) -> Result<TailCurveEstimate> {
    if statistics.is_empty() {
        return Err(Error::invalid(
            "tail estimation needs at least one statistic",
        ));
    }
    if statistics.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("non-finite statistic".into()));
    }
    let replicas = statistics.len() as u64;
    let (center, deviations): (f64, Vec<f64>) = match mode {
        TailMode::OneSided { offset } => (offset, statistics.iter().map(|s| s - offset).collect()),
        TailMode::TwoSided => {
            let (mean, _) = mean_and_variance(statistics);
            (mean, statistics.iter().map(|s| (s - mean).abs()).collect())
        }
    };
    let points = r_grid
        .iter()
        .map(|&r| {
            let exceed_count = deviations.iter().filter(|&&d| d >= r).count() as u64;
            let (wilson_low, wilson_high) = wilson_interval(exceed_count, replicas, Z95);
            TailPoint {
                r,
                empirical_p: exceed_count as f64 / replicas as f64,
                wilson_low,
                wilson_high,
                bound: bound.evaluate(r),
                exceed_count,
            }
        })
        .collect();
    Ok(TailCurveEstimate {
        mode,
        offset: center,
        replicas,
        points,
    })
}
