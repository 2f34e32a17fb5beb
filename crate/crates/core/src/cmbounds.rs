//! Closed-form concentration bounds and the estimators that check their
//! ingredients.
//!
//! Every tail bound has the shape `C * exp(-rate * r)`. The generic one
//! comes from a spectral gap `lambda1` and a triple-norm bound `delta`, with
//! `rate = sqrt(lambda1 / delta) / 2` and `C = 3` one-sided (`6` two-sided).
//! The application bounds are the same curve with the constants already
//! substituted.

use crate::rng::RandomnessSource;
use crate::{Error, Result};
use serde::Serialize;

/// How a gap value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapProvenance {
    Formula,
    ExactDiagonalization,
}

/// Spectral gap of a reversible chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapValue {
    pub lambda1: f64,
    pub provenance: GapProvenance,
}

impl GapValue {
    /// A zero gap is accepted but [`GapValue::is_degenerate`] reports it.
    pub fn new(lambda1: f64, provenance: GapProvenance) -> Result<Self> {
        if !(lambda1 >= 0.0) || !lambda1.is_finite() {
            return Err(Error::invalid(format!(
                "spectral gap {lambda1} must be finite and >= 0"
            )));
        }
        Ok(Self {
            lambda1,
            provenance,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.lambda1 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleNormProvenance {
    Analytic,
    Empirical,
}

/// Bound `delta` on the squared triple norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TripleNormBound {
    pub delta: f64,
    pub provenance: TripleNormProvenance,
    /// Standard error, for empirical estimates only.
    pub standard_error: Option<f64>,
}

impl TripleNormBound {
    pub fn analytic(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!(
                "triple norm bound {delta} must be finite and >= 0"
            )));
        }
        Ok(Self {
            delta,
            provenance: TripleNormProvenance::Analytic,
            standard_error: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

impl Sidedness {
    pub fn prefactor(self) -> f64 {
        match self {
            Sidedness::OneSided => 3.0,
            Sidedness::TwoSided => 6.0,
        }
    }
}

/// `r -> prefactor * exp(-rate * r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBoundCurve {
    pub prefactor: f64,
    pub rate: f64,
}

impl TailBoundCurve {
    pub fn new(prefactor: f64, rate: f64) -> Result<Self> {
        if !(prefactor > 0.0) || !(rate >= 0.0) || !prefactor.is_finite() || !rate.is_finite() {
            return Err(Error::invalid(format!(
                "tail curve needs prefactor > 0 and rate >= 0, got ({prefactor}, {rate})"
            )));
        }
        Ok(Self { prefactor, rate })
    }

    /// Raw bound value; may exceed 1.
    pub fn evaluate(&self, r: f64) -> f64 {
        self.prefactor * (-self.rate * r).exp()
    }

    /// Bound clamped to a probability, for reporting.
    pub fn evaluate_clamped(&self, r: f64) -> f64 {
        self.evaluate(r).min(1.0)
    }
}

/// `C exp(-r sqrt(lambda1 / delta) / 2)`.
pub fn generic_tail_bound(
    gap: &GapValue,
    delta: &TripleNormBound,
    sidedness: Sidedness,
) -> Result<TailBoundCurve> {
    if delta.delta == 0.0 {
        return Err(Error::invalid(
            "triple norm bound is zero: the statistic is almost surely constant",
        ));
    }
    TailBoundCurve::new(
        sidedness.prefactor(),
        0.5 * (gap.lambda1 / delta.delta).sqrt(),
    )
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!(
            "deviation r = {r} must be finite and >= 0"
        )));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("compression order k must be >= 1"));
    }
    Ok(())
}

fn check_scaling(n: usize, c: f64, alpha: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("c = {c} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Kac compression bound `12 sqrt(k) exp(-r sqrt(k / 32))`.
pub fn kac_esd_curve(k: usize) -> Result<TailBoundCurve> {
    check_k(k)?;
    let k = k as f64;
    TailBoundCurve::new(12.0 * k.sqrt(), (k / 32.0).sqrt())
}

pub fn kac_esd_bound(k: usize, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(kac_esd_curve(k)?.evaluate(r))
}

/// Gaussian compression bound `12 sqrt(k) exp(-r sqrt(k mu / 108))`.
pub fn thermostat_esd_curve(k: usize, mu: f64) -> Result<TailBoundCurve> {
    check_k(k)?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!(
            "thermostat rate mu = {mu} must be positive"
        )));
    }
    let k = k as f64;
    TailBoundCurve::new(12.0 * k.sqrt(), (k * mu / 108.0).sqrt())
}

pub fn thermostat_esd_bound(k: usize, mu: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(thermostat_esd_curve(k, mu)?.evaluate(r))
}

/// ASEP midpoint bound `6 exp(-(r/2) sqrt(c^2 (n-1) / n^(2 alpha)))`.
pub fn asep_midpoint_curve(n: usize, c: f64, alpha: f64) -> Result<TailBoundCurve> {
    check_scaling(n, c, alpha)?;
    if n % 2 != 0 {
        return Err(Error::invalid(format!("midpoint needs even n, got {n}")));
    }
    let nf = n as f64;
    TailBoundCurve::new(
        6.0,
        0.5 * (c * c * (nf - 1.0) / nf.powf(2.0 * alpha)).sqrt(),
    )
}

pub fn asep_midpoint_bound(n: usize, c: f64, alpha: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(asep_midpoint_curve(n, c, alpha)?.evaluate(r))
}

/// ASEP LIS bound `6 exp(-(r/2) c / n^alpha)`.
pub fn asep_lis_curve(n: usize, c: f64, alpha: f64) -> Result<TailBoundCurve> {
    check_scaling(n, c, alpha)?;
    TailBoundCurve::new(6.0, 0.5 * c / (n as f64).powf(alpha))
}

pub fn asep_lis_bound(n: usize, c: f64, alpha: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(asep_lis_curve(n, c, alpha)?.evaluate(r))
}

/// Partial product of the moment-generating-function recursion constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MgfProduct {
    pub terms: usize,
    pub value: f64,
    /// Upper bound on `limit - value`.
    pub remainder_bound: f64,
}

/// `prod_{k=0}^{K-1} (1 - 4^{-(k+1)})^{-2^k}`.
///
/// The log of the tail `k >= K` is at most
/// `sum_{k>=K} 2^k 4^{-(k+1)} / (1 - 4^{-(k+1)}) <= 2^{-K-1} / (1 - 4^{-K-1})`,
/// which gives the remainder bound.
pub fn mgf_product_constant(terms: usize) -> Result<MgfProduct> {
    if terms == 0 {
        return Err(Error::invalid("need at least one product term"));
    }
    if terms > 500 {
        return Err(Error::invalid("more than 500 terms adds nothing in f64"));
    }
    let log_value: f64 = (0..terms)
        .map(|k| -(2f64).powi(k as i32) * (-(4f64).powi(-(k as i32 + 1))).ln_1p())
        .sum();
    let value = log_value.exp();
    let x = (4f64).powi(-(terms as i32 + 1));
    let tail_log = (2f64).powi(-(terms as i32 + 1)) / (1.0 - x);
    Ok(MgfProduct {
        terms,
        value,
        remainder_bound: value * tail_log.exp_m1(),
    })
}

/// A Markov chain the estimators can drive.
pub trait MarkovChain {
    type State: Clone;

    /// Draws from the invariant distribution (or a documented stand-in).
    fn sample_state(&self, rng: &mut RandomnessSource) -> Result<Self::State>;

    /// Advances one step in place.
    fn step(&self, state: &mut Self::State, rng: &mut RandomnessSource) -> Result<()>;
}

/// Empirical triple norm: the largest, over sampled states, of half the
/// mean squared one-step change of `f`.
pub fn triple_norm_estimate<C, F>(
    chain: &C,
    f: F,
    state_samples: usize,
    inner_samples: usize,
    rng: &mut RandomnessSource,
) -> Result<TripleNormBound>
where
    C: MarkovChain,
    F: Fn(&C::State) -> Result<f64>,
{
    if state_samples == 0 || inner_samples == 0 {
        return Err(Error::invalid("sample counts must be >= 1"));
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for _ in 0..state_samples {
        let x0 = chain.sample_state(rng)?;
        let f0 = f(&x0)?;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..inner_samples {
            let mut x1 = x0.clone();
            chain.step(&mut x1, rng)?;
            let d = f(&x1)? - f0;
            let half_sq = 0.5 * d * d;
            sum += half_sq;
            sum_sq += half_sq * half_sq;
        }
        let m = inner_samples as f64;
        let mean = sum / m;
        let var = if inner_samples > 1 {
            ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
        } else {
            0.0
        };
        if mean > best.0 {
            best = (mean, (var / m).sqrt());
        }
    }
    Ok(TripleNormBound {
        delta: best.0,
        provenance: TripleNormProvenance::Empirical,
        standard_error: Some(best.1),
    })
}

/// Monte Carlo estimates of the Dirichlet form and the variance of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DirichletEstimate {
    pub qff: f64,
    pub varf: f64,
    pub sample_count: usize,
    pub qff_se: f64,
    pub varf_se: f64,
}

impl DirichletEstimate {
    /// Exact values (zero standard error), e.g. from a full kernel.
    pub fn exact(qff: f64, varf: f64) -> Self {
        Self {
            qff,
            varf,
            sample_count: 0,
            qff_se: 0.0,
            varf_se: 0.0,
        }
    }
}

/// Estimates `Q(f,f) = E (f(X1) - f(X0))^2 / 2` and `Var f(X0)` from
/// independent stationary pairs.
pub fn dirichlet_estimate<C, F>(
    chain: &C,
    f: F,
    samples: usize,
    rng: &mut RandomnessSource,
) -> Result<DirichletEstimate>
where
    C: MarkovChain,
    F: Fn(&C::State) -> Result<f64>,
{
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let mut halves = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x0 = chain.sample_state(rng)?;
        let mut x1 = x0.clone();
        chain.step(&mut x1, rng)?;
        let f0 = f(&x0)?;
        let d = f(&x1)? - f0;
        halves.push(0.5 * d * d);
        values.push(f0);
    }
    let m = samples as f64;
    let (qff, qvar) = crate::stats::mean_and_variance(&halves);
    let (mean_f, varf) = crate::stats::mean_and_variance(&values);
    let m4 = values.iter().map(|v| (v - mean_f).powi(4)).sum::<f64>() / m;
    Ok(DirichletEstimate {
        qff,
        varf,
        sample_count: samples,
        qff_se: (qvar / m).sqrt(),
        varf_se: ((m4 - varf * varf).max(0.0) / m).sqrt(),
    })
}

/// `Q(f,f) - lambda1 Var f` with its combined standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PoincareResidual {
    pub residual: f64,
    pub standard_error: f64,
}

impl PoincareResidual {
    /// Residual at least `-sigmas` standard errors.
    pub fn is_consistent(&self, sigmas: f64) -> bool {
        self.residual >= -sigmas * self.standard_error
    }
}

pub fn poincare_residual(gap: &GapValue, d: &DirichletEstimate) -> PoincareResidual {
    let l = gap.lambda1;
    PoincareResidual {
        residual: d.qff - l * d.varf,
        standard_error: (d.qff_se.powi(2) + (l * d.varf_se).powi(2)).sqrt(),
    }
}
