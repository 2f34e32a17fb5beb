//! Asymmetric simple exclusion on `{1..n}` with a fixed particle count.
//!
//! A configuration is a 0/1 string; bit 1 is a particle and, read as a walk,
//! a step up. Each step picks a bond `(i, i+1)` uniformly among the `n - 1`
//! bonds and swaps `10 -> 01` with probability `1 - q/2`, `01 -> 10` with
//! probability `q/2`.

mod blocking;
mod dynamics;
mod exact;
mod observables;

pub use blocking::{
    blocking_sample, blocking_variance, conditional_marginals, conditioned_blocking_sample,
    conditioned_midpoint_expectation, interface_midpoint_fraction, midpoint_expectation_bounds,
    q_threshold, stationary_sample, BlockingParams, BlockingVariance, QThreshold,
};
pub use dynamics::{
    apply_bond, asep_gap_asymptotic, asep_gap_formula, asep_run, asep_run_skipping, asep_step,
    discrete_gap_prediction, swap_ratio_parameter, AsepChain, AsepConfig, AsepParams, StepOutcome,
};
pub use exact::{
    exact_dirichlet, exact_gap, exact_stationary, transition_matrix, ExactGap, StationaryVector,
    GAP_CAPACITY, STATIONARY_CAPACITY,
};
pub use observables::{heights, lis_length, midpoint_height, StepConvention, WalkObservables};
