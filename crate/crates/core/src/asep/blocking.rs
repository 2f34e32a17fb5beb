//! Blocking (product) measures and their conditioning on the particle count.
//!
//! Site `k` (1-based) is occupied independently with probability
//! `p_k = a q^k / (1 + a q^k)`. Conditioned on `N = m` particles the law is
//! proportional to `q^{sum of occupied sites}` and no longer depends on `a`.

use super::observables::StepConvention;
use super::AsepConfig;
use crate::{Error, Result};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingParams {
    pub a: f64,
    pub q: f64,
}

impl BlockingParams {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!(
                "interface parameter a = {a} must be positive"
            )));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::invalid(format!("q = {q} must lie in (0, 1]")));
        }
        Ok(Self { a, q })
    }

    /// Places the half-filling interface at site `position`: `a = q^{-position}`.
    pub fn with_interface(q: f64, position: f64) -> Result<Self> {
        Self::new(q.powf(-position), q)
    }

    fn log_odds(&self, k: usize) -> f64 {
        self.a.ln() + k as f64 * self.q.ln()
    }

    /// `P(X_k = 1)` for 1-based site `k`.
    pub fn site_prob(&self, k: usize) -> f64 {
        1.0 / (1.0 + (-self.log_odds(k)).exp())
    }

    /// `(P(X_k = 1), P(X_k = 0))`, each computed without cancellation.
    fn site_pair(&self, k: usize) -> (f64, f64) {
        let x = self.log_odds(k);
        (1.0 / (1.0 + (-x).exp()), 1.0 / (1.0 + x.exp()))
    }
}

/// Independent sites with the blocking probabilities.
pub fn blocking_sample<R: Rng + ?Sized>(
    bp: &BlockingParams,
    n: usize,
    rng: &mut R,
) -> Result<AsepConfig> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1 sites"));
    }
    let bits = (1..=n)
        .map(|k| u8::from(rng.random::<f64>() < bp.site_prob(k)))
        .collect();
    Ok(AsepConfig::from_bits_unchecked(bits))
}

/// Rows `Z(i, t) = P(sum_{j >= i} X_j = t)` for `t <= m`, each rescaled to
/// max 1. Row `i` (0-based) covers sites `i+1..=n`; row `n` is the empty sum.
/// Only ratios within a row are used, so the scale factors can be dropped.
fn suffix_table(bp: &BlockingParams, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; m + 1]; n + 1];
    rows[n][0] = 1.0;
    for i in (0..n).rev() {
        let (p, q) = bp.site_pair(i + 1);
        let (next, cur) = {
            let (head, tail) = rows.split_at_mut(i + 1);
            (&tail[0], &mut head[i])
        };
        for t in 0..=m {
            let with = if t > 0 { p * next[t - 1] } else { 0.0 };
            cur[t] = with + q * next[t];
        }
        normalize(cur);
    }
    rows
}

/// Same as [`suffix_table`] for prefixes: row `i` covers sites `1..=i`.
fn prefix_table(bp: &BlockingParams, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; m + 1]; n + 1];
    rows[0][0] = 1.0;
    for i in 0..n {
        let (p, q) = bp.site_pair(i + 1);
        let (head, tail) = rows.split_at_mut(i + 1);
        let prev = &head[i];
        let cur = &mut tail[0];
        for t in 0..=m {
            let with = if t > 0 { p * prev[t - 1] } else { 0.0 };
            cur[t] = with + q * prev[t];
        }
        normalize(cur);
    }
    rows
}

fn normalize(row: &mut [f64]) {
    let max = row.iter().fold(0.0f64, |a, &b| a.max(b));
    if max > 0.0 {
        row.iter_mut().for_each(|v| *v /= max);
    }
}

fn check_count(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1 sites"));
    }
    if m > n {
        return Err(Error::invalid(format!(
            "cannot place {m} particles on {n} sites"
        )));
    }
    Ok(())
}

/// Exact draw from the blocking measure conditioned on exactly `m` particles.
///
/// Sites are filled left to right with
/// `P(X_i = 1 | t left) = p_i Z(i+1, t-1) / Z(i, t)`.
pub fn conditioned_blocking_sample<R: Rng + ?Sized>(
    bp: &BlockingParams,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<AsepConfig> {
    check_count(n, m)?;
    let table = suffix_table(bp, n, m);
    let mut bits = Vec::with_capacity(n);
    let mut left = m;
    for i in 0..n {
        let (p, q) = bp.site_pair(i + 1);
        let next = &table[i + 1];
        let w1 = if left > 0 { p * next[left - 1] } else { 0.0 };
        let w0 = q * next[left];
        let total = w1 + w0;
        if !(total > 0.0) {
            return Err(Error::Numeric(format!(
                "conditional weights vanished at site {} (n = {n}, m = {m})",
                i + 1
            )));
        }
        let one = rng.random::<f64>() * total < w1;
        if one {
            left -= 1;
        }
        bits.push(u8::from(one));
    }
    debug_assert_eq!(left, 0);
    Ok(AsepConfig::from_bits_unchecked(bits))
}

/// `P(X_i = 1 | N = m)` for every site, by forward-backward recursion.
pub fn conditional_marginals(bp: &BlockingParams, n: usize, m: usize) -> Result<Vec<f64>> {
    check_count(n, m)?;
    let prefix = prefix_table(bp, n, m);
    let suffix = suffix_table(bp, n, m);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (p, q) = bp.site_pair(i + 1);
        let before = &prefix[i];
        let after = &suffix[i + 1];
        let (mut one, mut zero) = (0.0, 0.0);
        for t in 0..=m {
            if before[t] == 0.0 {
                continue;
            }
            if t < m {
                one += before[t] * p * after[m - 1 - t];
            }
            zero += before[t] * q * after[m - t];
        }
        let total = one + zero;
        if !(total > 0.0) {
            return Err(Error::Numeric(format!(
                "conditional weights vanished at site {}",
                i + 1
            )));
        }
        out.push(one / total);
    }
    Ok(out)
}

/// Exact `E[H_{n/2} | N = m]` under the blocking measure.
pub fn conditioned_midpoint_expectation(
    bp: &BlockingParams,
    n: usize,
    m: usize,
    convention: StepConvention,
) -> Result<f64> {
    if n % 2 != 0 {
        return Err(Error::invalid(format!("midpoint needs even n, got {n}")));
    }
    let marginals = conditional_marginals(bp, n, m)?;
    let sign = match convention {
        StepConvention::OneIsUp => 1.0,
        StepConvention::OneIsDown => -1.0,
    };
    Ok(marginals[..n / 2]
        .iter()
        .map(|p| sign * (2.0 * p - 1.0))
        .sum())
}

/// Draw from the stationary law of the chain with `m` particles.
///
/// Detailed balance gives weights `r^{sum of occupied sites}` with
/// `r = (2 - q) / q`. That is the conditioned blocking measure with ratio
/// `q / (2 - q)`, read right to left.
pub fn stationary_sample<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    q: f64,
    rng: &mut R,
) -> Result<AsepConfig> {
    check_count(n, m)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!("q = {q} must lie in (0, 1]")));
    }
    let ratio = q / (2.0 - q);
    let bp = BlockingParams::with_interface(ratio, (n as f64 + 1.0) / 2.0)?;
    let mut cfg = conditioned_blocking_sample(&bp, n, m, rng)?;
    let mut bits = cfg.bits().to_vec();
    bits.reverse();
    cfg = AsepConfig::from_bits_unchecked(bits);
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockingVariance {
    /// `sum_i p_i (1 - p_i)`.
    pub exact: f64,
    /// `n p_1 (1 - p_1)`, the first-site bound.
    pub first_site_bound: f64,
}

pub fn blocking_variance(bp: &BlockingParams, n: usize) -> BlockingVariance {
    let exact = (1..=n)
        .map(|k| {
            let (p, q) = bp.site_pair(k);
            p * q
        })
        .sum();
    let (p1, q1) = bp.site_pair(1);
    BlockingVariance {
        exact,
        first_site_bound: n as f64 * p1 * q1,
    }
}

/// Bounds on `E H_k` under the product measure with bit 1 as a DOWN step:
/// `-k (2 a q / (a q + 1) - 1) <= E H_k <= -k (2 a q^k / (a q^k + 1) - 1)`.
pub fn midpoint_expectation_bounds(k: usize, a: f64, q: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::invalid("need k >= 1"));
    }
    let bp = BlockingParams::new(a, q)?;
    let kf = k as f64;
    let lower = -kf * (2.0 * bp.site_prob(1) - 1.0);
    let upper = -kf * (2.0 * bp.site_prob(k) - 1.0);
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QThreshold {
    /// `(3/5)^{20/n}`.
    pub q_min: f64,
    /// `-20 ln(3/5)`.
    pub c: f64,
}

pub fn q_threshold(n: usize) -> Result<QThreshold> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    Ok(QThreshold {
        q_min: 0.6f64.powf(20.0 / n as f64),
        c: -20.0 * 0.6f64.ln(),
    })
}

/// `E[H_{n/2} | N = n/2] / n` with bit 1 as a down step, `q = 1 - c/n`,
/// `c = -20 ln(3/5)` and the interface at `9n/20`.
pub fn interface_midpoint_fraction(n: usize) -> Result<f64> {
    if n % 2 != 0 {
        return Err(Error::invalid(format!("need even n, got {n}")));
    }
    let c = q_threshold(n)?.c;
    let q = 1.0 - c / n as f64;
    if !(q > 0.0) {
        return Err(Error::invalid(format!(
            "q = 1 - c/n is not positive for n = {n}"
        )));
    }
    let bp = BlockingParams::with_interface(q, 9.0 * n as f64 / 20.0)?;
    Ok(conditioned_midpoint_expectation(&bp, n, n / 2, StepConvention::OneIsDown)? / n as f64)
}
