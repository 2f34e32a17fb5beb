//! Kac walk on SO(n), realized on the conjugated matrix `H = O G O^T`.
//!
//! Each step picks an unordered pair `i < j` uniformly and an angle uniformly
//! on `(-pi, pi]`, then replaces `H` by `R_ij(theta) H R_ij(theta)^T`. Only
//! `H` is stored; the group element is never formed.

use crate::cmbounds::{GapProvenance, GapValue, MarkovChain, TripleNormBound};
use crate::matcore::givens::conjugate_in_place;
use crate::matcore::{
    esd_of, haar_so_n, jacobi_eigenvalues, kolmogorov_distance, top_left_block, EsdStepFunction,
    RotationEvent, Spectrum, SymMatrix, DEFAULT_TOLERANCE,
};
use crate::rng::RandomnessSource;
use crate::{Error, Result};
use rand::Rng;
use std::f64::consts::PI;

/// Steps between spectral drift audits unless configured otherwise.
pub const DEFAULT_AUDIT_CADENCE: u64 = 10_000;
/// Allowed drift of the spectrum, relative to its largest magnitude.
pub const DRIFT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct KacChainState {
    h: SymMatrix,
    seed_spectrum: Spectrum,
    step_count: u64,
    audit_cadence: u64,
}

impl KacChainState {
    /// Starts the chain at `H = G`.
    pub fn new(seed: SymMatrix) -> Result<Self> {
        let seed_spectrum = jacobi_eigenvalues(&seed, DEFAULT_TOLERANCE)?;
        Ok(Self {
            h: seed,
            seed_spectrum,
            step_count: 0,
            audit_cadence: DEFAULT_AUDIT_CADENCE,
        })
    }

    /// Starts from `O G O^T` with `O` Haar on SO(n), i.e. a stationary draw.
    pub fn stationary(seed: &SymMatrix, rng: &mut RandomnessSource) -> Result<Self> {
        let o = haar_so_n(seed.order(), rng)?;
        let h = o.conjugate(seed)?;
        let mut state = Self::new(seed.clone())?;
        state.h = h;
        Ok(state)
    }

    /// Applies a single uniformly random rotation to `G`. This is the
    /// one-rotation reading of "conjugate by a random rotation"; the
    /// stationary start is what the experiments use.
    pub fn single_rotation(seed: &SymMatrix, rng: &mut RandomnessSource) -> Result<Self> {
        let mut state = Self::new(seed.clone())?;
        state.step(rng)?;
        state.step_count = 0;
        Ok(state)
    }

    pub fn with_audit_cadence(mut self, cadence: u64) -> Self {
        self.audit_cadence = cadence;
        self
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.h
    }

    pub fn order(&self) -> usize {
        self.h.order()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn seed_spectrum(&self) -> &Spectrum {
        &self.seed_spectrum
    }

    /// One Kac step; returns the rotation used.
    pub fn step(&mut self, rng: &mut RandomnessSource) -> Result<RotationEvent> {
        let e = sample_rotation_event(self.order(), rng)?;
        self.apply(&e)?;
        Ok(e)
    }

    /// Applies a given rotation as one step (forced draws in tests).
    pub fn apply(&mut self, e: &RotationEvent) -> Result<()> {
        conjugate_in_place(&mut self.h, e)?;
        self.step_count += 1;
        if self.audit_cadence > 0 && self.step_count % self.audit_cadence == 0 {
            self.audit_drift()?;
        }
        Ok(())
    }

    /// Largest elementwise gap between the current and the seed spectrum.
    pub fn spectral_drift(&self) -> Result<f64> {
        let now = jacobi_eigenvalues(&self.h, DEFAULT_TOLERANCE)?;
        Ok(now
            .max_abs_diff(&self.seed_spectrum)
            .expect("conjugation preserves the order"))
    }

    fn audit_drift(&self) -> Result<()> {
        let drift = self.spectral_drift()?;
        let scale = self
            .seed_spectrum
            .values()
            .iter()
            .fold(1.0f64, |acc, v| acc.max(v.abs()));
        if drift > DRIFT_TOLERANCE * scale {
            return Err(Error::Numeric(format!(
                "spectral drift {drift:e} after {} steps",
                self.step_count
            )));
        }
        Ok(())
    }
}

/// Uniform pair over the `C(n, 2)` unordered pairs and uniform angle on `(-pi, pi]`.
pub fn sample_rotation_event<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<RotationEvent> {
    if n < 2 {
        return Err(Error::invalid(format!("Kac walk needs n >= 2, got {n}")));
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let u: f64 = rng.random();
    Ok(RotationEvent {
        i: a.min(b),
        j: a.max(b),
        theta: PI - 2.0 * PI * u,
    })
}

/// One Kac step on `state`. Free-function form of [`KacChainState::step`].
pub fn kac_step(state: &mut KacChainState, rng: &mut RandomnessSource) -> Result<RotationEvent> {
    state.step(rng)
}

/// Spectral gap `(n + 2) / (2 (n - 1) n)`.
pub fn kac_gap_formula(n: usize) -> Result<GapValue> {
    if n < 2 {
        return Err(Error::invalid(format!("Kac gap needs n >= 2, got {n}")));
    }
    let n = n as f64;
    GapValue::new((n + 2.0) / (2.0 * (n - 1.0) * n), GapProvenance::Formula)
}

/// Compression of order `k` inside ambient order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionSpec {
    pub n: usize,
    pub k: usize,
}

impl CompressionSpec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "need 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        Ok(Self { n, k })
    }
}

/// Analytic triple-norm bound `4 / (k n)` for a fixed-`x` ESD value of the
/// leading `k x k` block.
pub fn kac_triple_norm_bound(n: usize, k: usize) -> Result<TripleNormBound> {
    let spec = CompressionSpec::new(n, k)?;
    TripleNormBound::analytic(4.0 / (spec.k as f64 * spec.n as f64))
}

/// ESD of the leading `k x k` block of the current matrix.
pub fn compressed_esd(state: &KacChainState, spec: &CompressionSpec) -> Result<EsdStepFunction> {
    check_order(state, spec)?;
    esd_of(&top_left_block(state.matrix(), spec.k)?)
}

/// `||F_A - F||_inf` for `A` the leading block and `F` the reference.
pub fn compressed_esd_statistic(
    state: &KacChainState,
    spec: &CompressionSpec,
    reference: &EsdStepFunction,
) -> Result<f64> {
    Ok(kolmogorov_distance(
        &compressed_esd(state, spec)?,
        reference,
    ))
}

fn check_order(state: &KacChainState, spec: &CompressionSpec) -> Result<()> {
    if state.order() != spec.n {
        return Err(Error::invalid(format!(
            "compression built for n = {} applied to order {}",
            spec.n,
            state.order()
        )));
    }
    Ok(())
}

/// The Kac walk as a [`MarkovChain`] over `H`, started from Haar draws.
#[derive(Debug, Clone)]
pub struct KacChain {
    pub seed: SymMatrix,
}

impl MarkovChain for KacChain {
    type State = KacChainState;

    fn sample_state(&self, rng: &mut RandomnessSource) -> Result<KacChainState> {
        Ok(KacChainState::stationary(&self.seed, rng)?.with_audit_cadence(0))
    }

    fn step(&self, state: &mut KacChainState, rng: &mut RandomnessSource) -> Result<()> {
        state.step(rng).map(|_| ())
    }
}
