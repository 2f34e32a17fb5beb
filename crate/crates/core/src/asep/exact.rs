//! Exact enumeration of the fixed-particle state space: stationary vector,
//! transition kernel and spectral gap. Desk scale only.

use super::{AsepConfig, AsepParams};
use crate::cmbounds::{DirichletEstimate, GapProvenance, GapValue};
use crate::matcore::{jacobi_eigenvalues, SymMatrix, DEFAULT_TOLERANCE};
use crate::{Error, Result};
use std::collections::HashMap;

/// Largest state space `exact_stationary` will enumerate.
pub const STATIONARY_CAPACITY: u64 = 100_000;
/// Largest state space `exact_gap` will diagonalize.
pub const GAP_CAPACITY: u64 = 10_000;

fn binomial(n: usize, m: usize) -> u128 {
    if m > n {
        return 0;
    }
    let m = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn check_capacity(n: usize, m: usize, limit: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::invalid(format!("ASEP needs n >= 2, got {n}")));
    }
    if m > n {
        return Err(Error::invalid(format!(
            "cannot place {m} particles on {n} sites"
        )));
    }
    if n > 128 {
        return Err(Error::Capacity {
            what: "ASEP sites for exact enumeration",
            size: n as u64,
            limit: 128,
        });
    }
    let size = binomial(n, m);
    if size > limit as u128 {
        return Err(Error::Capacity {
            what: "ASEP state space",
            size: size.min(u64::MAX as u128) as u64,
            limit,
        });
    }
    Ok(size as u64)
}

/// All masks with `m` of the low `n` bits set, in increasing order.
/// Bit `i` of a mask is site `i + 1`.
fn enumerate(n: usize, m: usize) -> Vec<u128> {
    if m == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x: u128 = (1u128 << m) - 1;
    let limit = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    loop {
        out.push(x);
        // Gosper's hack: next larger integer with the same popcount
        let c = x & x.wrapping_neg();
        let r = x.wrapping_add(c);
        if r == 0 {
            break;
        }
        let next = (((r ^ x) >> 2) / c) | r;
        if next > limit || next < x {
            break;
        }
        x = next;
    }
    out
}

fn mask_to_config(mask: u128, n: usize) -> AsepConfig {
    AsepConfig::from_bits_unchecked((0..n).map(|i| (mask >> i & 1) as u8).collect())
}

fn config_to_mask(cfg: &AsepConfig) -> u128 {
    cfg.bits()
        .iter()
        .enumerate()
        .fold(0u128, |acc, (i, &b)| acc | (u128::from(b) << i))
}

/// Neighbours reachable in one step with their probabilities (self-loop excluded).
fn moves(mask: u128, p: &AsepParams) -> impl Iterator<Item = (u128, f64)> + '_ {
    let w = 1.0 / (p.n - 1) as f64;
    (0..p.n - 1).filter_map(move |b| {
        let l = (mask >> b & 1) as u8;
        let r = (mask >> (b + 1) & 1) as u8;
        let prob = p.swap_probability(l, r);
        (prob > 0.0).then(|| (mask ^ (0b11u128 << b), prob * w))
    })
}

/// Stationary law over all `C(n, m)` configurations.
#[derive(Debug, Clone)]
pub struct StationaryVector {
    n: usize,
    m: usize,
    q: f64,
    states: Vec<u128>,
    probs: Vec<f64>,
    index: HashMap<u128, usize>,
}

impl StationaryVector {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn configs(&self) -> impl Iterator<Item = AsepConfig> + '_ {
        self.states.iter().map(|&s| mask_to_config(s, self.n))
    }

    pub fn probability_of(&self, cfg: &AsepConfig) -> Option<f64> {
        if cfg.len() != self.n {
            return None;
        }
        self.index.get(&config_to_mask(cfg)).map(|&i| self.probs[i])
    }

    /// Largest `|pi(x) P(x, y) - pi(y) P(y, x)|` over neighbouring pairs.
    pub fn detailed_balance_residual(&self) -> f64 {
        let p = AsepParams::new(self.n, self.q).expect("validated at construction");
        let mut worst: f64 = 0.0;
        for (i, &x) in self.states.iter().enumerate() {
            for (y, pxy) in moves(x, &p) {
                let j = self.index[&y];
                let pyx = moves(y, &p)
                    .find(|&(z, _)| z == x)
                    .map(|(_, v)| v)
                    .unwrap_or(0.0);
                worst = worst.max((self.probs[i] * pxy - self.probs[j] * pyx).abs());
            }
        }
        worst
    }

    /// Particle count.
    pub fn particles(&self) -> usize {
        self.m
    }
}

/// Weights `r^{sum of occupied sites}`, `r = (2 - q) / q`, normalized.
pub fn exact_stationary(n: usize, m: usize, q: f64) -> Result<StationaryVector> {
    check_capacity(n, m, STATIONARY_CAPACITY)?;
    AsepParams::new(n, q)?;
    let states = enumerate(n, m);
    let log_r = ((2.0 - q) / q).ln();
    let logw: Vec<f64> = states
        .iter()
        .map(|&s| {
            let pos: u32 = (0..n)
                .filter(|&i| s >> i & 1 == 1)
                .map(|i| i as u32 + 1)
                .sum();
            log_r * pos as f64
        })
        .collect();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(StationaryVector {
        n,
        m,
        q,
        states,
        probs,
        index,
    })
}

/// Dense one-step kernel, row-major, in the order of [`StationaryVector::configs`].
pub fn transition_matrix(n: usize, m: usize, q: f64) -> Result<(Vec<AsepConfig>, Vec<f64>)> {
    check_capacity(n, m, GAP_CAPACITY)?;
    let p = AsepParams::new(n, q)?;
    let states = enumerate(n, m);
    let index: HashMap<u128, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let size = states.len();
    let mut kernel = vec![0.0; size * size];
    for (i, &x) in states.iter().enumerate() {
        let mut out = 0.0;
        for (y, pxy) in moves(x, &p) {
            kernel[i * size + index[&y]] += pxy;
            out += pxy;
        }
        kernel[i * size + i] += 1.0 - out;
    }
    Ok((
        states.iter().map(|&s| mask_to_config(s, n)).collect(),
        kernel,
    ))
}

#[derive(Debug, Clone)]
pub struct ExactGap {
    pub gap: GapValue,
    pub second_eigenvalue: f64,
    /// Largest `|S_xy - S_yx|` of `D^{1/2} P D^{-1/2}` before averaging.
    pub symmetry_residual: f64,
    pub detailed_balance_residual: f64,
    pub states: usize,
}

/// `1 - lambda_2` of the kernel symmetrized against the stationary vector.
pub fn exact_gap(n: usize, m: usize, q: f64) -> Result<ExactGap> {
    check_capacity(n, m, GAP_CAPACITY)?;
    let stationary = exact_stationary(n, m, q)?;
    let size = stationary.len();
    if size < 2 {
        return Err(Error::invalid(format!(
            "chain with n = {n}, m = {m} has a single state; its gap is undefined"
        )));
    }
    let (_, kernel) = transition_matrix(n, m, q)?;
    let root: Vec<f64> = stationary.probs.iter().map(|p| p.sqrt()).collect();
    let s = |x: usize, y: usize| root[x] * kernel[x * size + y] / root[y];
    let mut residual: f64 = 0.0;
    let sym = SymMatrix::from_upper_fn(size, |x, y| {
        let (a, b) = (s(x, y), s(y, x));
        residual = residual.max((a - b).abs());
        0.5 * (a + b)
    })?;
    let spectrum = jacobi_eigenvalues(&sym, DEFAULT_TOLERANCE)?;
    let second = spectrum.values()[size - 2];
    Ok(ExactGap {
        gap: GapValue::new((1.0 - second).max(0.0), GapProvenance::ExactDiagonalization)?,
        second_eigenvalue: second,
        symmetry_residual: residual,
        detailed_balance_residual: stationary.detailed_balance_residual(),
        states: size,
    })
}

/// Exact `Q(f, f)` and `Var_pi f` from the full kernel.
pub fn exact_dirichlet(
    n: usize,
    m: usize,
    q: f64,
    f: impl Fn(&AsepConfig) -> f64,
) -> Result<DirichletEstimate> {
    let stationary = exact_stationary(n, m, q)?;
    check_capacity(n, m, GAP_CAPACITY)?;
    let p = AsepParams::new(n, q)?;
    let values: Vec<f64> = stationary.configs().map(|c| f(&c)).collect();
    let mean: f64 = values
        .iter()
        .zip(&stationary.probs)
        .map(|(v, p)| v * p)
        .sum();
    let var: f64 = values
        .iter()
        .zip(&stationary.probs)
        .map(|(v, p)| p * (v - mean).powi(2))
        .sum();
    let mut q2 = 0.0;
    for (i, &x) in stationary.states.iter().enumerate() {
        for (y, pxy) in moves(x, &p) {
            let j = stationary.index[&y];
            q2 += stationary.probs[i] * pxy * (values[j] - values[i]).powi(2);
        }
    }
    Ok(DirichletEstimate::exact(0.5 * q2, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        for (n, m) in [(2, 1), (6, 3), (10, 4), (8, 0), (8, 8), (12, 6)] {
            let s = enumerate(n, m);
            assert_eq!(s.len() as u128, binomial(n, m), "n={n} m={m}");
            assert!(s.iter().all(|x| x.count_ones() as usize == m));
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn symmetric_exclusion_is_uniform() {
        let s = exact_stationary(6, 3, 1.0).unwrap();
        assert_eq!(s.len(), 20);
        for p in s.probabilities() {
            assert!((p - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn two_site_ratio() {
        let q = 0.3;
        let s = exact_stationary(2, 1, q).unwrap();
        let p10 = s.probability_of(&AsepConfig::parse("10").unwrap()).unwrap();
        let p01 = s.probability_of(&AsepConfig::parse("01").unwrap()).unwrap();
        assert!((p10 / p01 - (q / 2.0) / (1.0 - q / 2.0)).abs() < 1e-14);
        assert!((p10 + p01 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sums_to_one_and_balances() {
        for q in [0.2, 0.6, 1.0] {
            let s = exact_stationary(10, 4, q).unwrap();
            assert!((s.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.detailed_balance_residual() <= 1e-12);
        }
    }

    #[test]
    fn two_state_gap_is_one() {
        for q in [0.3, 0.7, 1.0] {
            let g = exact_gap(2, 1, q).unwrap();
            assert!((g.gap.lambda1 - 1.0).abs() < 1e-12);
            assert!(g.symmetry_residual <= 1e-12);
        }
    }

    #[test]
    fn gap_in_unit_interval() {
        for q in [0.1, 0.5, 0.9, 1.0] {
            let g = exact_gap(6, 3, q).unwrap();
            assert!(g.gap.lambda1 > 0.0 && g.gap.lambda1 <= 1.0);
            assert!(g.symmetry_residual <= 1e-12);
        }
    }

    #[test]
    fn kernel_rows_are_stochastic() {
        let (_, k) = transition_matrix(6, 2, 0.4).unwrap();
        let size = 15;
        for row in k.chunks(size) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(
            exact_stationary(40, 20, 0.5),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(exact_gap(18, 9, 0.5), Err(Error::Capacity { .. })));
        assert!(exact_gap(4, 0, 0.5).is_err());
    }

    #[test]
    fn two_state_dirichlet_is_tight() {
        // f = 1{state = 10}: Q(f,f) = Var f = (q/2)(1 - q/2) and the gap is 1.
        let q = 0.6;
        let d = exact_dirichlet(2, 1, q, |c| f64::from(c.bits()[0])).unwrap();
        let want = (q / 2.0) * (1.0 - q / 2.0);
        assert!((d.qff - want).abs() < 1e-15);
        assert!((d.varf - want).abs() < 1e-15);
    }
}
