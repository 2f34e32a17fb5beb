use super::AsepConfig;
use crate::{Error, Result};
use serde::Serialize;

/// Which bit value counts as an up step when reading a configuration as a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepConvention {
    #[default]
    OneIsUp,
    /// Used by the interface (blocking-measure) midpoint argument.
    OneIsDown,
}

impl StepConvention {
    #[inline]
    pub fn step(self, bit: u8) -> i64 {
        let up = match self {
            StepConvention::OneIsUp => bit == 1,
            StepConvention::OneIsDown => bit == 0,
        };
        if up {
            1
        } else {
            -1
        }
    }
}

/// Heights `H_1..H_n` of the walk.
pub fn heights(cfg: &AsepConfig, convention: StepConvention) -> Vec<i64> {
    cfg.bits()
        .iter()
        .scan(0i64, |h, &b| {
            *h += convention.step(b);
            Some(*h)
        })
        .collect()
}

/// `H_{n/2}` with bit 1 as an up step.
pub fn midpoint_height(cfg: &AsepConfig) -> Result<i64> {
    let n = cfg.len();
    if n % 2 != 0 {
        return Err(Error::invalid(format!("midpoint needs even n, got {n}")));
    }
    Ok(cfg.bits()[..n / 2]
        .iter()
        .map(|&b| StepConvention::OneIsUp.step(b))
        .sum())
}

/// Longest non-decreasing subsequence of the height sequence, by patience
/// sorting in `O(n log n)`.
pub fn lis_length(cfg: &AsepConfig) -> usize {
    longest_nondecreasing(&heights(cfg, StepConvention::OneIsUp))
}

pub(crate) fn longest_nondecreasing(values: &[i64]) -> usize {
    // tails[l] = smallest possible last value of a run of length l + 1
    let mut tails: Vec<i64> = Vec::with_capacity(values.len());
    for &v in values {
        let pos = tails.partition_point(|&t| t <= v);
        if pos == tails.len() {
            tails.push(v);
        } else {
            tails[pos] = v;
        }
    }
    tails.len()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkObservables {
    pub heights: Vec<i64>,
    /// `None` for odd `n`.
    pub midpoint: Option<i64>,
    pub lis: usize,
    pub count: usize,
}

impl WalkObservables {
    pub fn from_config(cfg: &AsepConfig) -> Self {
        let heights = heights(cfg, StepConvention::OneIsUp);
        let n = cfg.len();
        Self {
            midpoint: (n % 2 == 0).then(|| if n == 0 { 0 } else { heights[n / 2 - 1] }),
            lis: longest_nondecreasing(&heights),
            count: cfg.particle_count(),
            heights,
        }
    }
}
