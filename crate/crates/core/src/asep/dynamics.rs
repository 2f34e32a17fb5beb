use super::blocking::stationary_sample;
use crate::cmbounds::{GapProvenance, GapValue, MarkovChain};
use crate::rng::RandomnessSource;
use crate::{Error, Result};
use rand::Rng;
use std::f64::consts::PI;
use std::fmt;

/// Fixed-length 0/1 configuration.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AsepConfig {
    bits: Vec<u8>,
}

impl AsepConfig {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("configuration needs n >= 1 sites"));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::invalid(format!("site value {b} is not 0 or 1")));
        }
        Ok(Self {
            bits: bits.to_vec(),
        })
    }

    /// Parses strings such as `"1100"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::invalid(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn particle_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub(crate) fn swap_bond(&mut self, bond: usize) {
        self.bits.swap(bond, bond + 1);
    }
}

impl fmt::Debug for AsepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AsepConfig(")?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsepParams {
    pub n: usize,
    pub q: f64,
    /// `(q + 1/q) / 2`.
    pub delta: f64,
    /// `(c, alpha)` when built from `q = 1 - c / n^alpha`.
    pub scaling: Option<(f64, f64)>,
}

impl AsepParams {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("ASEP needs n >= 2, got {n}")));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::invalid(format!("q = {q} must lie in (0, 1]")));
        }
        Ok(Self {
            n,
            q,
            delta: 0.5 * (q + 1.0 / q),
            scaling: None,
        })
    }

    /// `q = 1 - c / n^alpha`, which must land in `(0, 1)`.
    pub fn from_scaling(n: usize, c: f64, alpha: f64) -> Result<Self> {
        let q = scaled_q(n, c, alpha)?;
        let mut p = Self::new(n, q)?;
        p.scaling = Some((c, alpha));
        Ok(p)
    }

    /// Probability of swapping the pair `(left, right)` when its bond is chosen.
    pub fn swap_probability(&self, left: u8, right: u8) -> f64 {
        match (left, right) {
            (1, 0) => 1.0 - 0.5 * self.q,
            (0, 1) => 0.5 * self.q,
            _ => 0.0,
        }
    }
}

pub(crate) fn scaled_q(n: usize, c: f64, alpha: f64) -> Result<f64> {
    if n == 0 || !(c > 0.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "need n >= 1, c > 0, 0 < alpha < 1; got n = {n}, c = {c}, alpha = {alpha}"
        )));
    }
    let q = 1.0 - c / (n as f64).powf(alpha);
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!(
            "q = 1 - c / n^alpha = {q} is outside (0, 1) for n = {n}, c = {c}, alpha = {alpha}"
        )));
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    /// Zero-based bond: sites `bond` and `bond + 1`.
    pub bond: usize,
    pub swapped: bool,
}

/// Applies bond `bond` with acceptance draw `u` in `[0, 1)`.
pub fn apply_bond(
    cfg: &mut AsepConfig,
    p: &AsepParams,
    bond: usize,
    u: f64,
) -> Result<StepOutcome> {
    if bond + 1 >= cfg.len() {
        return Err(Error::invalid(format!(
            "bond {bond} outside n = {}",
            cfg.len()
        )));
    }
    let prob = p.swap_probability(cfg.bits[bond], cfg.bits[bond + 1]);
    let swapped = u < prob;
    if swapped {
        cfg.swap_bond(bond);
    }
    Ok(StepOutcome { bond, swapped })
}

/// One chain step: a uniform bond, then one acceptance draw in `[0, 1)`.
/// The draw is taken even when the bond cannot move so that every step
/// consumes the same randomness.
pub fn asep_step<R: Rng + ?Sized>(
    cfg: &mut AsepConfig,
    p: &AsepParams,
    rng: &mut R,
) -> Result<StepOutcome> {
    check_length(cfg, p)?;
    let bond = rng.random_range(0..cfg.len() - 1);
    let u = rng.random::<f64>();
    apply_bond(cfg, p, bond, u)
}

fn check_length(cfg: &AsepConfig, p: &AsepParams) -> Result<()> {
    if cfg.len() != p.n {
        return Err(Error::invalid(format!(
            "parameters for n = {} applied to n = {}",
            p.n,
            cfg.len()
        )));
    }
    Ok(())
}

/// `steps` chain steps with the same draws as repeated [`asep_step`] calls,
/// so the trajectories coincide. Branch-free inner loop. Returns the number
/// of swaps.
pub fn asep_run<R: Rng + ?Sized>(
    cfg: &mut AsepConfig,
    p: &AsepParams,
    steps: u64,
    rng: &mut R,
) -> Result<u64> {
    check_length(cfg, p)?;
    // indexed by 2 * left + right
    let table = [0.0, p.swap_probability(0, 1), p.swap_probability(1, 0), 0.0];
    let n = cfg.len();
    let bits = cfg.bits.as_mut_slice();
    let mut swaps = 0;
    for _ in 0..steps {
        let bond = rng.random_range(0..n - 1);
        let u = rng.random::<f64>();
        let (x, y) = (bits[bond], bits[bond + 1]);
        let swap = u8::from(u < table[usize::from(2 * x + y)]);
        let flip = swap & (x ^ y);
        bits[bond] = x ^ flip;
        bits[bond + 1] = y ^ flip;
        swaps += u64::from(swap);
    }
    Ok(swaps)
}

/// Bonds of one kind with O(1) insert, remove and indexed access.
struct BondSet {
    members: Vec<usize>,
    slot: Vec<usize>,
}

impl BondSet {
    const ABSENT: usize = usize::MAX;

    fn new(bonds: usize) -> Self {
        Self {
            members: Vec::new(),
            slot: vec![Self::ABSENT; bonds],
        }
    }

    fn insert(&mut self, b: usize) {
        if self.slot[b] == Self::ABSENT {
            self.slot[b] = self.members.len();
            self.members.push(b);
        }
    }

    fn remove(&mut self, b: usize) {
        let i = self.slot[b];
        if i != Self::ABSENT {
            let last = self.members.pop().expect("slot points into members");
            if last != b {
                self.members[i] = last;
                self.slot[last] = i;
            }
            self.slot[b] = Self::ABSENT;
        }
    }
}

/// `steps` chain steps simulated event by event: the number of idle steps
/// before the next swap is drawn from its geometric law and the swapping
/// bond is then chosen in proportion to its rate. Same law as [`asep_run`]
/// but far cheaper when most proposals are rejected, as they are near
/// stationarity. Returns the number of swaps.
pub fn asep_run_skipping<R: Rng + ?Sized>(
    cfg: &mut AsepConfig,
    p: &AsepParams,
    steps: u64,
    rng: &mut R,
) -> Result<u64> {
    check_length(cfg, p)?;
    let n = cfg.len();
    let bonds = n - 1;
    let (pr, pl) = (p.swap_probability(1, 0), p.swap_probability(0, 1));
    let bits = cfg.bits.as_mut_slice();
    let mut right = BondSet::new(bonds);
    let mut left = BondSet::new(bonds);
    let classify = |bits: &[u8], b: usize, right: &mut BondSet, left: &mut BondSet| {
        right.remove(b);
        left.remove(b);
        match (bits[b], bits[b + 1]) {
            (1, 0) => right.insert(b),
            (0, 1) => left.insert(b),
            _ => {}
        }
    };
    for b in 0..bonds {
        classify(bits, b, &mut right, &mut left);
    }
    let mut remaining = steps;
    let mut swaps = 0;
    while remaining > 0 {
        let wr = right.members.len() as f64 * pr;
        let w = wr + left.members.len() as f64 * pl;
        let per_step = w / bonds as f64;
        if !(per_step > 0.0) {
            break;
        }
        // idle steps before the next swap: floor(ln U / ln(1 - P)), U in (0, 1]
        let idle = if per_step >= 1.0 {
            0.0
        } else {
            ((1.0 - rng.random::<f64>()).ln() / (-per_step).ln_1p()).floor()
        };
        if idle >= remaining as f64 {
            break;
        }
        remaining -= idle as u64 + 1;
        let v = rng.random::<f64>() * w;
        let b = if v < wr {
            let i = ((v / pr) as usize).min(right.members.len() - 1);
            right.members[i]
        } else {
            let i = (((v - wr) / pl) as usize).min(left.members.len() - 1);
            left.members[i]
        };
        bits.swap(b, b + 1);
        swaps += 1;
        for bb in b.saturating_sub(1)..=(b + 1).min(bonds - 1) {
            classify(bits, bb, &mut right, &mut left);
        }
    }
    Ok(swaps)
}

/// `1 - cos(pi / n) / Delta` with `Delta = (q + 1/q) / 2`.
pub fn asep_gap_formula(n: usize, q: f64) -> Result<GapValue> {
    let p = AsepParams::new(n, q)?;
    GapValue::new(
        1.0 - (PI / n as f64).cos() / p.delta,
        GapProvenance::Formula,
    )
}

/// Small-asymmetry approximation `c^2 / (2 n^(2 alpha))`.
pub fn asep_gap_asymptotic(n: usize, c: f64, alpha: f64) -> Result<GapValue> {
    scaled_q(n, c, alpha)?;
    GapValue::new(
        c * c / (2.0 * (n as f64).powf(2.0 * alpha)),
        GapProvenance::Formula,
    )
}

/// `sqrt(q / (2 - q))`: the square root of the ratio of left to right swap
/// probabilities. This is the asymmetry parameter for which the gap formula
/// describes the bond-averaged chain above.
pub fn swap_ratio_parameter(q: f64) -> f64 {
    (q / (2.0 - q)).sqrt()
}

/// Gap of the discrete chain predicted from the formula: one bond in
/// `n - 1` is active per step, and the asymmetry is [`swap_ratio_parameter`].
pub fn discrete_gap_prediction(n: usize, q: f64) -> Result<GapValue> {
    AsepParams::new(n, q)?;
    let g = asep_gap_formula(n, swap_ratio_parameter(q))?;
    GapValue::new(g.lambda1 / (n - 1) as f64, GapProvenance::Formula)
}

/// ASEP with `m` particles, started from its stationary law.
#[derive(Debug, Clone, Copy)]
pub struct AsepChain {
    pub params: AsepParams,
    pub m: usize,
}

impl MarkovChain for AsepChain {
    type State = AsepConfig;

    fn sample_state(&self, rng: &mut RandomnessSource) -> Result<AsepConfig> {
        stationary_sample(self.params.n, self.m, self.params.q, rng)
    }

    fn step(&self, state: &mut AsepConfig, rng: &mut RandomnessSource) -> Result<()> {
        asep_step(state, &self.params, rng).map(|_| ())
    }
}
