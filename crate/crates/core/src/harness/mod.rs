//! Experiment engine: declarative specs, replica-parallel Monte Carlo,
//! expected-ESD pilot estimation, tail curves with Wilson intervals and
//! CSV/JSON reporting.

mod engine;
mod report;
mod spec;
mod tail;

pub use engine::{
    asep_statistics, estimate_expected_esd, seed_matrix, simulate, ExperimentOutcome, RunOptions,
    StatisticSummary, TripleNormAudit, TRIPLE_NORM_SIGMAS,
};
pub use report::{render_csv, run_experiment, RunReport, RunSummary, CSV_HEADER};
pub use spec::{
    uniform_grid, ExperimentKind, ExperimentSpec, ResolvedSpec, SeedMatrixKind,
    DEFAULT_MASTER_SEED, MIN_PILOT_REPLICAS,
};
pub use tail::{estimate_tail_curve, TailCurveEstimate, TailMode, TailPoint};
