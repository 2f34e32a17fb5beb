//! Concentration-of-measure laboratory for Markov chains.
//!
//! Simulators for the Kac walk on SO(n), the Kac walk coupled to a Gaussian
//! thermostat and the asymmetric simple exclusion process, together with the
//! spectral-gap formulas, tail-bound evaluators and a deterministic,
//! replica-parallel Monte Carlo harness that checks empirical tails against
//! those bounds.

pub mod asep;
pub mod cmbounds;
mod error;
pub mod harness;
pub mod kacwalk;
pub mod matcore;
pub mod rng;
pub mod stats;
pub mod thermo;

pub use error::{Error, Result};
pub use rng::{RandomnessSource, ReplicaSeed, StreamNamespace};

pub use asep::{AsepConfig, AsepParams, BlockingParams, ExactGap};
pub use cmbounds::{
    DirichletEstimate, GapProvenance, GapValue, MarkovChain, Sidedness, TailBoundCurve,
    TripleNormBound, TripleNormProvenance,
};
pub use harness::{ExperimentKind, ExperimentSpec, RunOptions, RunReport, TailCurveEstimate};
pub use kacwalk::{CompressionSpec, KacChainState};
pub use matcore::{EsdStepFunction, OrthogonalMatrix, RotationEvent, Spectrum, SymMatrix};
pub use thermo::{GaussMatrixState, ThermostatParams};
