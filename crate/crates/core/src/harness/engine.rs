//! Replica-parallel simulation of each experiment kind.
//!
//! Replica `i` of a run always draws from stream `(masterSeed, namespace, i)`
//! and results are collected in replica order, so every output is a pure
//! function of the resolved spec whatever the worker count.

use super::spec::{ExperimentKind, ResolvedSpec, SeedMatrixKind};
use super::tail::{estimate_tail_curve, TailCurveEstimate, TailMode};
use crate::asep::{
    asep_gap_formula, asep_run_skipping, blocking_variance, conditioned_midpoint_expectation,
    discrete_gap_prediction, exact_gap, lis_length, midpoint_expectation_bounds, midpoint_height,
    q_threshold, stationary_sample, AsepChain, AsepConfig, AsepParams, BlockingParams,
    StepConvention,
};
use crate::cmbounds::{
    asep_lis_curve, asep_midpoint_curve, kac_esd_curve, mgf_product_constant, thermostat_esd_curve,
    triple_norm_estimate, TailBoundCurve, TripleNormBound,
};
use crate::kacwalk::{
    compressed_esd_statistic, kac_triple_norm_bound, CompressionSpec, KacChain, KacChainState,
};
use crate::matcore::{
    esd_of, haar_so_n, kolmogorov_distance, top_left_block, EsdStepFunction, SymMatrix,
};
use crate::rng::{RandomnessSource, ReplicaSeed, StreamNamespace};
use crate::stats::mean_and_variance;
use crate::thermo::{coupled_step, gaussian_compression, GaussMatrixState, ThermostatParams};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

/// Triple-norm estimates must not exceed the analytic bound by more than
/// this many standard errors.
pub const TRIPLE_NORM_SIGMAS: f64 = 3.0;

/// Worker configuration for a run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Thread count; `None` uses one per available core.
    pub workers: Option<usize>,
    /// Overrides the spec's `outputPath`.
    pub output_path: Option<std::path::PathBuf>,
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub spec: ResolvedSpec,
    /// Per-replica statistics, in replica order.
    pub statistics: Vec<f64>,
    pub tail: Option<TailCurveEstimate>,
    /// Extra bound curves reported row by row, e.g. by `bounds-audit`.
    pub curves: Vec<(String, Option<usize>, TailBoundCurve)>,
    /// Kind-specific results for the JSON summary.
    pub details: Value,
    /// Human-readable description of each failed check.
    pub violations: Vec<String>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn statistic_summary(&self) -> Option<StatisticSummary> {
        StatisticSummary::of(&self.statistics)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatisticSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl StatisticSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let (mean, var) = mean_and_variance(values);
        Some(Self {
            count: values.len(),
            mean,
            sd: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config(vec!["workers: must be >= 1".into()]));
        }
        builder = builder.num_threads(w);
    }
    builder
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))
}

/// Evaluates `f` on every replica index of `namespace`, in order.
fn replicate<T, F>(
    pool: &rayon::ThreadPool,
    master_seed: u64,
    namespace: StreamNamespace,
    count: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomnessSource) -> Result<T> + Sync,
{
    pool.install(|| {
        (0..count as u64)
            .into_par_iter()
            .map(|i| f(&mut ReplicaSeed::new(master_seed, namespace, i).rng()))
            .collect()
    })
}

/// The fixed matrix conjugated by the compression experiments.
pub fn seed_matrix(spec: &ResolvedSpec) -> SymMatrix {
    match spec.seed_matrix {
        SeedMatrixKind::Goe => {
            let mut rng = ReplicaSeed::new(spec.master_seed, StreamNamespace::SeedMatrix, 0).rng();
            SymMatrix::goe(spec.n, &mut rng)
        }
        SeedMatrixKind::Identity => SymMatrix::identity(spec.n),
        SeedMatrixKind::Zero => SymMatrix::zeros(spec.n),
    }
}

fn compression_k(spec: &ResolvedSpec) -> Result<usize> {
    spec.k
        .ok_or_else(|| Error::invalid(format!("{} needs a compression order k", spec.kind)))
}

/// Leading `k x k` block of a stationary Kac state after `burn_in` steps.
fn kac_block(
    g: &SymMatrix,
    k: usize,
    burn_in: u64,
    rng: &mut RandomnessSource,
) -> Result<SymMatrix> {
    if burn_in == 0 {
        return haar_so_n(g.order(), rng)?.conjugate_block(g, k);
    }
    let mut state = KacChainState::stationary(g, rng)?;
    for _ in 0..burn_in {
        state.step(rng)?;
    }
    top_left_block(state.matrix(), k)
}

/// `S^T H S` for a stationary thermostat state after `burn_in` coupled steps.
fn thermo_block(
    h: &SymMatrix,
    p: &ThermostatParams,
    k: usize,
    burn_in: u64,
    rng: &mut RandomnessSource,
) -> Result<SymMatrix> {
    let mut state = GaussMatrixState::stationary(p, rng);
    for _ in 0..burn_in {
        coupled_step(&mut state, p, rng)?;
    }
    gaussian_compression(h, &state, k)
}

fn thermo_params(spec: &ResolvedSpec) -> Result<ThermostatParams> {
    ThermostatParams::new(spec.n, spec.beta.unwrap_or(1.0), spec.mu.unwrap_or(1.0))
}

/// Compressed-matrix sampler for the two ESD experiments.
fn block_sampler<'a>(
    spec: &ResolvedSpec,
    g: &'a SymMatrix,
) -> Result<impl Fn(&mut RandomnessSource) -> Result<SymMatrix> + Sync + 'a> {
    let k = compression_k(spec)?;
    CompressionSpec::new(spec.n, k)?;
    let thermo = match spec.kind {
        ExperimentKind::ThermoEsd => Some(thermo_params(spec)?),
        _ => None,
    };
    let burn_in = spec.burn_in;
    Ok(move |rng: &mut RandomnessSource| match &thermo {
        Some(p) => thermo_block(g, p, k, burn_in, rng),
        None => kac_block(g, k, burn_in, rng),
    })
}

/// Average ESD of `pilotReplicas` independent compressed samples, drawn
/// from the pilot stream so it never overlaps the main replicas.
pub fn estimate_expected_esd(
    spec: &ResolvedSpec,
    workers: Option<usize>,
) -> Result<EsdStepFunction> {
    let pool = build_pool(workers)?;
    let g = seed_matrix(spec);
    pilot_esd(spec, &pool, &g)
}

fn pilot_esd(
    spec: &ResolvedSpec,
    pool: &rayon::ThreadPool,
    g: &SymMatrix,
) -> Result<EsdStepFunction> {
    if !matches!(
        spec.kind,
        ExperimentKind::KacEsd | ExperimentKind::ThermoEsd | ExperimentKind::BoundsAudit
    ) {
        return Err(Error::invalid(format!(
            "{} has no spectral distribution",
            spec.kind
        )));
    }
    if spec.pilot_replicas < super::spec::MIN_PILOT_REPLICAS {
        return Err(Error::invalid(format!(
            "pilot ensemble needs at least {} replicas, got {}",
            super::spec::MIN_PILOT_REPLICAS,
            spec.pilot_replicas
        )));
    }
    let sample = block_sampler(spec, g)?;
    let parts = replicate(
        pool,
        spec.master_seed,
        StreamNamespace::Pilot,
        spec.pilot_replicas,
        |rng| esd_of(&sample(rng)?),
    )?;
    EsdStepFunction::average(&parts)
}

/// Runs the experiment in memory.
pub fn simulate(spec: &ResolvedSpec, options: &RunOptions) -> Result<ExperimentOutcome> {
    let pool = build_pool(options.workers)?;
    match spec.kind {
        ExperimentKind::KacEsd | ExperimentKind::ThermoEsd => esd_experiment(spec, &pool),
        ExperimentKind::AsepMidpoint | ExperimentKind::AsepLis => asep_experiment(spec, &pool),
        ExperimentKind::AsepGap => gap_audit(spec),
        ExperimentKind::BoundsAudit => bounds_audit(spec, &pool),
        ExperimentKind::BlockingAudit => blocking_audit(spec),
    }
}

fn empty_outcome(spec: &ResolvedSpec) -> ExperimentOutcome {
    ExperimentOutcome {
        spec: spec.clone(),
        statistics: Vec::new(),
        tail: None,
        curves: Vec::new(),
        details: Value::Null,
        violations: Vec::new(),
    }
}

fn tail_violations(kind: ExperimentKind, tail: &TailCurveEstimate) -> Vec<String> {
    tail.violations()
        .map(|p| {
            format!(
                "{kind}: at r = {} the Wilson lower limit {} exceeds min(1, bound) = {}",
                p.r,
                p.wilson_low,
                p.bound.min(1.0)
            )
        })
        .collect()
}

fn esd_experiment(spec: &ResolvedSpec, pool: &rayon::ThreadPool) -> Result<ExperimentOutcome> {
    let k = compression_k(spec)?;
    let g = seed_matrix(spec);
    let reference = pilot_esd(spec, pool, &g)?;
    let sample = block_sampler(spec, &g)?;
    let statistics = replicate(
        pool,
        spec.master_seed,
        StreamNamespace::Main,
        spec.replicas,
        |rng| Ok(kolmogorov_distance(&esd_of(&sample(rng)?)?, &reference)),
    )?;
    let curve = match spec.kind {
        ExperimentKind::ThermoEsd => thermostat_esd_curve(k, spec.mu.unwrap_or(1.0))?,
        _ => kac_esd_curve(k)?,
    };
    let offset = 1.0 / (k as f64).sqrt();
    let tail = estimate_tail_curve(
        &statistics,
        &spec.r_grid,
        TailMode::OneSided { offset },
        &curve,
    )?;
    let mut out = empty_outcome(spec);
    out.violations = tail_violations(spec.kind, &tail);
    out.details = json!({
        "boundCurve": curve,
        "referenceJumps": reference.len(),
    });
    out.statistics = statistics;
    out.tail = Some(tail);
    Ok(out)
}

fn asep_params(spec: &ResolvedSpec) -> Result<(AsepParams, usize)> {
    let q = spec
        .q
        .ok_or_else(|| Error::invalid("ASEP experiment without q"))?;
    let m = spec.particles.unwrap_or(spec.n / 2);
    Ok((AsepParams::new(spec.n, q)?, m))
}

/// Stationary ASEP configuration advanced by `burn_in` steps.
fn asep_replica(
    p: &AsepParams,
    m: usize,
    burn_in: u64,
    rng: &mut RandomnessSource,
) -> Result<AsepConfig> {
    let mut cfg = stationary_sample(p.n, m, p.q, rng)?;
    asep_run_skipping(&mut cfg, p, burn_in, rng)?;
    Ok(cfg)
}

/// `(M_X, L_X)` for every main replica of an ASEP spec, in replica order.
/// Both ASEP tail experiments are computed from these pairs. `M_X` is NaN
/// for odd `n`.
pub fn asep_statistics(spec: &ResolvedSpec, options: &RunOptions) -> Result<Vec<(f64, f64)>> {
    let pool = build_pool(options.workers)?;
    asep_pairs(spec, &pool)
}

fn asep_pairs(spec: &ResolvedSpec, pool: &rayon::ThreadPool) -> Result<Vec<(f64, f64)>> {
    let (p, m) = asep_params(spec)?;
    if p.n % 2 != 0 {
        return Err(Error::invalid(format!(
            "midpoint needs even n, got {}",
            p.n
        )));
    }
    replicate(
        pool,
        spec.master_seed,
        StreamNamespace::Main,
        spec.replicas,
        |rng| {
            let cfg = asep_replica(&p, m, spec.burn_in, rng)?;
            let mx = if p.n % 2 == 0 {
            midpoint_height(&cfg)? as f64
        } else {
            f64::NAN
        };
        Ok((mx, lis_length(&cfg) as f64))
        },
    )
}

fn asep_experiment(spec: &ResolvedSpec, pool: &rayon::ThreadPool) -> Result<ExperimentOutcome> {
    let (p, m) = asep_params(spec)?;
    let (c, alpha) = (spec.c.unwrap_or(1.0), spec.alpha.unwrap_or(0.5));
    let midpoint = spec.kind == ExperimentKind::AsepMidpoint;
    let statistics = asep_pairs(spec, pool)?
        .into_iter()
        .map(|(mx, lx)| if midpoint { mx } else { lx })
        .collect::<Vec<_>>();
    let curve = if midpoint {
        asep_midpoint_curve(spec.n, c, alpha)?
    } else {
        asep_lis_curve(spec.n, c, alpha)?
    };
    let tail = estimate_tail_curve(&statistics, &spec.r_grid, TailMode::TwoSided, &curve)?;
    let mut out = empty_outcome(spec);
    out.violations = tail_violations(spec.kind, &tail);
    let summary = StatisticSummary::of(&statistics);
    let scale = 3.0 * (spec.n as f64).powf(alpha);
    out.details = json!({
        "boundCurve": curve,
        "q": p.q,
        "particles": m,
        "fluctuationScale": {
            "sd": summary.map(|s| s.sd),
            "limit": scale,
            "withinLimit": summary.map(|s| s.sd <= scale),
        },
    });
    out.statistics = statistics;
    out.tail = Some(tail);
    Ok(out)
}

fn gap_audit(spec: &ResolvedSpec) -> Result<ExperimentOutcome> {
    let (p, m) = asep_params(spec)?;
    let exact = exact_gap(p.n, m, p.q)?;
    let formula = asep_gap_formula(p.n, p.q)?;
    let predicted = discrete_gap_prediction(p.n, p.q)?;
    let mut out = empty_outcome(spec);
    let gap = exact.gap.lambda1;
    if exact.detailed_balance_residual > 1e-12 {
        out.violations.push(format!(
            "asep-gap: detailed-balance residual {} exceeds 1e-12",
            exact.detailed_balance_residual
        ));
    }
    let mismatch = (gap - predicted.lambda1).abs();
    if mismatch > 1e-9 * predicted.lambda1.max(1e-300) {
        out.violations.push(format!(
            "asep-gap: exact gap {gap} differs from the predicted discrete gap {}",
            predicted.lambda1
        ));
    }
    out.details = json!({
        "states": exact.states,
        "particles": m,
        "q": p.q,
        "exactGap": gap,
        "secondEigenvalue": exact.second_eigenvalue,
        "formulaGap": formula.lambda1,
        "ratioToFormula": if formula.lambda1 > 0.0 { Some(gap / formula.lambda1) } else { None },
        "predictedDiscreteGap": predicted.lambda1,
        "symmetryResidual": exact.symmetry_residual,
        "detailedBalanceResidual": exact.detailed_balance_residual,
    });
    Ok(out)
}

/// One empirical triple-norm audit against its analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TripleNormAudit {
    pub estimate: f64,
    pub standard_error: f64,
    pub analytic: f64,
    pub passed: bool,
}

impl TripleNormAudit {
    pub fn new(estimate: &TripleNormBound, analytic: f64) -> Self {
        let se = estimate.standard_error.unwrap_or(0.0);
        Self {
            estimate: estimate.delta,
            standard_error: se,
            analytic,
            passed: estimate.delta <= analytic + TRIPLE_NORM_SIGMAS * se,
        }
    }
}

fn bounds_audit(spec: &ResolvedSpec, pool: &rayon::ThreadPool) -> Result<ExperimentOutcome> {
    let n = spec.n;
    let k = compression_k(spec)?;
    let cs = CompressionSpec::new(n, k)?;
    let (p, m) = asep_params(spec)?;
    let (c, alpha) = (spec.c.unwrap_or(1.0), spec.alpha.unwrap_or(0.5));
    let mut out = empty_outcome(spec);

    let g = seed_matrix(spec);
    let reference = pilot_esd(spec, pool, &g)?;
    let kac = KacChain { seed: g };
    let mut rng = ReplicaSeed::new(spec.master_seed, StreamNamespace::Audit, 0).rng();
    let kac_est = triple_norm_estimate(
        &kac,
        |s| compressed_esd_statistic(s, &cs, &reference),
        spec.state_samples,
        spec.inner_samples,
        &mut rng,
    )?;
    let kac_audit = TripleNormAudit::new(&kac_est, kac_triple_norm_bound(n, k)?.delta);

    let chain = AsepChain { params: p, m };
    let mut rng = ReplicaSeed::new(spec.master_seed, StreamNamespace::Audit, 1).rng();
    let mid_est = triple_norm_estimate(
        &chain,
        |s| Ok(midpoint_height(s)? as f64),
        spec.state_samples,
        spec.inner_samples,
        &mut rng,
    )?;
    let mid_audit = TripleNormAudit::new(&mid_est, 1.0 / (2.0 * (n as f64 - 1.0)));
    // A swap across the centre bond moves the midpoint by 2.
    let mid_sup = 2.0 * (1.0 - p.q / 2.0) / (n as f64 - 1.0);

    let mut rng = ReplicaSeed::new(spec.master_seed, StreamNamespace::Audit, 2).rng();
    let lis_est = triple_norm_estimate(
        &chain,
        |s| Ok(lis_length(s) as f64),
        spec.state_samples,
        spec.inner_samples,
        &mut rng,
    )?;
    let lis_audit = TripleNormAudit::new(&lis_est, 0.5);

    for (name, audit) in [
        ("kac-esd", kac_audit),
        ("asep-midpoint", mid_audit),
        ("asep-lis", lis_audit),
    ] {
        if !audit.passed {
            out.violations.push(format!(
                "bounds-audit: {name} triple norm estimate {} exceeds {} + {TRIPLE_NORM_SIGMAS} x {}",
                audit.estimate, audit.analytic, audit.standard_error
            ));
        }
    }
    let mgf = mgf_product_constant(30)?;
    if !(mgf.value < 3.0) {
        out.violations.push(format!(
            "bounds-audit: MGF product constant {} is not below 3",
            mgf.value
        ));
    }
    out.curves = vec![
        ("kac-esd".into(), Some(k), kac_esd_curve(k)?),
        (
            "asep-midpoint".into(),
            None,
            asep_midpoint_curve(n, c, alpha)?,
        ),
        ("asep-lis".into(), None, asep_lis_curve(n, c, alpha)?),
    ];
    out.details = json!({
        "tripleNorms": {
            "kacEsd": kac_audit,
            "asepMidpoint": mid_audit,
            "asepMidpointExactSupremum": mid_sup,
            "asepLis": lis_audit,
        },
        "mgfProduct": mgf,
    });
    Ok(out)
}

fn blocking_audit(spec: &ResolvedSpec) -> Result<ExperimentOutcome> {
    let n = spec.n;
    let q = spec
        .q
        .ok_or_else(|| Error::invalid("blocking audit without q"))?;
    let a = spec
        .a
        .ok_or_else(|| Error::invalid("blocking audit without a"))?;
    let bp = BlockingParams::new(a, q)?;
    let expectation = conditioned_midpoint_expectation(&bp, n, n / 2, StepConvention::OneIsDown)?;
    let variance = blocking_variance(&bp, n);
    let (low, high) = midpoint_expectation_bounds(n / 2, a, q)?;
    let mut out = empty_outcome(spec);
    if variance.exact > n as f64 {
        out.violations.push(format!(
            "blocking-audit: particle-count variance {} exceeds n = {n}",
            variance.exact
        ));
    }
    out.details = json!({
        "q": q,
        "a": a,
        "midpointExpectation": expectation,
        "midpointFraction": expectation / n as f64,
        "productMeasureBounds": { "lower": low, "upper": high },
        "blockingVariance": variance,
        "qThreshold": q_threshold(n)?,
    });
    Ok(out)
}
