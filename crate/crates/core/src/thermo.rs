//! Kac walk coupled to a Gaussian thermostat, acting on the columns of an
//! `n x n` real matrix.
//!
//! A thermostat event picks a column `j` and an angle `theta`, draws
//! `omega ~ N(0, 1/beta)^n`, and sends `g_ij -> g_ij cos(theta) + omega_i sin(theta)`.
//! A coupled step is one Kac rotation mixing two columns followed by one
//! thermostat event, so at most three columns change per step. The
//! thermostat rate `mu` only enters the bound formulas.

use crate::cmbounds::{GapProvenance, GapValue, MarkovChain};
use crate::kacwalk::sample_rotation_event;
use crate::matcore::{DenseMatrix, RotationEvent, SymMatrix};
use crate::rng::RandomnessSource;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermostatParams {
    pub n: usize,
    /// Inverse temperature; entries have variance `1 / beta`.
    pub beta: f64,
    /// Thermostat interaction rate.
    pub mu: f64,
}

impl ThermostatParams {
    pub fn new(n: usize, beta: f64, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("thermostat needs n >= 1"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta = {beta} must be positive")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("mu = {mu} must be positive")));
        }
        Ok(Self { n, beta, mu })
    }

    pub fn variance(&self) -> f64 {
        1.0 / self.beta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermostatEvent {
    pub j: usize,
    pub theta: f64,
    pub omega: Vec<f64>,
}

/// One Kac column rotation followed by one thermostat refresh.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledEvent {
    pub kac: RotationEvent,
    pub thermostat: ThermostatEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussMatrixState {
    g: DenseMatrix,
    step_count: u64,
}

impl GaussMatrixState {
    pub fn new(g: DenseMatrix) -> Result<Self> {
        if g.rows() != g.cols() || g.rows() == 0 {
            return Err(Error::invalid(
                "thermostat state must be a non-empty square matrix",
            ));
        }
        if !g.is_finite() {
            return Err(Error::invalid("thermostat state has non-finite entries"));
        }
        Ok(Self { g, step_count: 0 })
    }

    /// Draw from the invariant product Gaussian measure.
    pub fn stationary<R: Rng + ?Sized>(p: &ThermostatParams, rng: &mut R) -> Self {
        Self {
            g: DenseMatrix::gaussian(p.n, p.n, p.variance(), rng),
            step_count: 0,
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn order(&self) -> usize {
        self.g.rows()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Applies a thermostat event as one step.
    pub fn apply_thermostat(&mut self, e: &ThermostatEvent) -> Result<()> {
        self.refresh_column(e)?;
        self.step_count += 1;
        Ok(())
    }

    /// Applies a coupled event as one step.
    pub fn apply_coupled(&mut self, e: &CoupledEvent) -> Result<()> {
        self.rotate_columns(&e.kac)?;
        self.refresh_column(&e.thermostat)?;
        self.step_count += 1;
        Ok(())
    }

    fn refresh_column(&mut self, e: &ThermostatEvent) -> Result<()> {
        let n = self.order();
        if e.j >= n || e.omega.len() != n {
            return Err(Error::invalid(format!(
                "thermostat event (column {}, {} draws) does not fit order {n}",
                e.j,
                e.omega.len()
            )));
        }
        if e.theta == 0.0 {
            return Ok(());
        }
        let (s, c) = e.theta.sin_cos();
        for (i, &w) in e.omega.iter().enumerate() {
            let v = self.g.get(i, e.j);
            self.g.set(i, e.j, v * c + w * s);
        }
        Ok(())
    }

    /// Columns `i, j` become `c g_i + s g_j` and `-s g_i + c g_j`.
    fn rotate_columns(&mut self, e: &RotationEvent) -> Result<()> {
        let n = self.order();
        if e.i >= e.j || e.j >= n {
            return Err(Error::invalid(format!(
                "column rotation ({}, {}) does not fit order {n}",
                e.i, e.j
            )));
        }
        if e.theta == 0.0 {
            return Ok(());
        }
        let (s, c) = e.theta.sin_cos();
        for r in 0..n {
            let a = self.g.get(r, e.i);
            let b = self.g.get(r, e.j);
            self.g.set(r, e.i, c * a + s * b);
            self.g.set(r, e.j, -s * a + c * b);
        }
        Ok(())
    }
}

pub fn sample_thermostat_event<R: Rng + ?Sized>(
    p: &ThermostatParams,
    rng: &mut R,
) -> ThermostatEvent {
    let j = rng.random_range(0..p.n);
    let theta = 2.0 * PI * rng.random::<f64>();
    let sd = p.variance().sqrt();
    let omega = (0..p.n)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    ThermostatEvent { j, theta, omega }
}

/// Thermostat-only step.
pub fn thermostat_step(
    state: &mut GaussMatrixState,
    p: &ThermostatParams,
    rng: &mut RandomnessSource,
) -> Result<ThermostatEvent> {
    check_params(state, p)?;
    let e = sample_thermostat_event(p, rng);
    state.apply_thermostat(&e)?;
    Ok(e)
}

/// Kac column rotation then thermostat refresh.
pub fn coupled_step(
    state: &mut GaussMatrixState,
    p: &ThermostatParams,
    rng: &mut RandomnessSource,
) -> Result<CoupledEvent> {
    check_params(state, p)?;
    let kac = sample_rotation_event(p.n, rng)?;
    let thermostat = sample_thermostat_event(p, rng);
    let e = CoupledEvent { kac, thermostat };
    state.apply_coupled(&e)?;
    Ok(e)
}

fn check_params(state: &GaussMatrixState, p: &ThermostatParams) -> Result<()> {
    if state.order() != p.n {
        return Err(Error::invalid(format!(
            "parameters for n = {} applied to order {}",
            p.n,
            state.order()
        )));
    }
    Ok(())
}

/// Spectral gap `mu / (2 n)`. `mu = 0` yields a degenerate zero gap.
pub fn thermostat_gap_formula(n: usize, mu: f64) -> Result<GapValue> {
    if n == 0 {
        return Err(Error::invalid("thermostat needs n >= 1"));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu = {mu} must be >= 0")));
    }
    GapValue::new(mu / (2.0 * n as f64), GapProvenance::Formula)
}

/// `S^T H S` with `S` the first `k` columns of the state, symmetrized as
/// `(M + M^T) / 2`.
pub fn gaussian_compression(
    h: &SymMatrix,
    state: &GaussMatrixState,
    k: usize,
) -> Result<SymMatrix> {
    Ok(raw_compression(h, state, k)?.0)
}

/// Returns the symmetrized compression and the largest raw asymmetry
/// `|M_ab - M_ba|` before symmetrization.
pub fn raw_compression(
    h: &SymMatrix,
    state: &GaussMatrixState,
    k: usize,
) -> Result<(SymMatrix, f64)> {
    let n = state.order();
    if h.order() != n {
        return Err(Error::invalid(format!(
            "matrix of order {} cannot be compressed by a state of order {n}",
            h.order()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let g = state.matrix();
    // t = H S, n x k
    let mut t = vec![0.0; n * k];
    for r in 0..n {
        let hrow = h.row(r);
        for b in 0..k {
            t[r * k + b] = (0..n).map(|l| hrow[l] * g.get(l, b)).sum();
        }
    }
    let mut m = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            m[a * k + b] = (0..n).map(|l| g.get(l, a) * t[l * k + b]).sum();
        }
    }
    let mut out = SymMatrix::zeros(k);
    let mut asym: f64 = 0.0;
    for a in 0..k {
        for b in a..k {
            let (x, y) = (m[a * k + b], m[b * k + a]);
            asym = asym.max((x - y).abs());
            out.set(a, b, 0.5 * (x + y))?;
        }
    }
    Ok((out, asym))
}

/// Thermostat-only dynamics started from the product Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct ThermostatChain {
    pub params: ThermostatParams,
}

impl MarkovChain for ThermostatChain {
    type State = GaussMatrixState;

    fn sample_state(&self, rng: &mut RandomnessSource) -> Result<GaussMatrixState> {
        Ok(GaussMatrixState::stationary(&self.params, rng))
    }

    fn step(&self, state: &mut GaussMatrixState, rng: &mut RandomnessSource) -> Result<()> {
        thermostat_step(state, &self.params, rng).map(|_| ())
    }
}

/// Coupled Kac + thermostat dynamics started from the product Gaussian.
#[derive(Debug, Clone, Copy)]
pub struct CoupledChain {
    pub params: ThermostatParams,
}

impl MarkovChain for CoupledChain {
    type State = GaussMatrixState;

    fn sample_state(&self, rng: &mut RandomnessSource) -> Result<GaussMatrixState> {
        Ok(GaussMatrixState::stationary(&self.params, rng))
    }

    fn step(&self, state: &mut GaussMatrixState, rng: &mut RandomnessSource) -> Result<()> {
        coupled_step(state, &self.params, rng).map(|_| ())
    }
}
