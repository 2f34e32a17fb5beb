//! CSV and JSON reporting.

use super::engine::{simulate, ExperimentOutcome, RunOptions, StatisticSummary};
use super::spec::{ExperimentSpec, ResolvedSpec};
use super::tail::TailCurveEstimate;
use crate::Result;
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CSV_HEADER: [&str; 17] = [
    "experiment",
    "n",
    "k",
    "q",
    "c",
    "alpha",
    "beta",
    "mu",
    "r",
    "offset",
    "empirical_p",
    "ci_low",
    "ci_high",
    "bound",
    "exceed_count",
    "replicas",
    "seed",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn spec_columns(spec: &ResolvedSpec, experiment: &str, k: Option<usize>) -> [String; 8] {
    [
        experiment.to_string(),
        spec.n.to_string(),
        opt(k),
        opt(spec.q),
        opt(spec.c),
        opt(spec.alpha),
        opt(spec.beta),
        opt(spec.mu),
    ]
}

/// Renders the CSV report. Floats use Rust's shortest round-trip form, so the
/// bytes depend only on the values.
pub fn render_csv(outcome: &ExperimentOutcome) -> Result<Vec<u8>> {
    let spec = &outcome.spec;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let seed = spec.master_seed.to_string();
    if let Some(tail) = &outcome.tail {
        let head = spec_columns(spec, spec.kind.name(), spec.k);
        for p in &tail.points {
            let row = [
                p.r.to_string(),
                tail.offset.to_string(),
                p.empirical_p.to_string(),
                p.wilson_low.to_string(),
                p.wilson_high.to_string(),
                p.bound.to_string(),
                p.exceed_count.to_string(),
                tail.replicas.to_string(),
                seed.clone(),
            ];
            w.write_record(head.iter().chain(row.iter()))?;
        }
    }
    for (name, k, curve) in &outcome.curves {
        let head = spec_columns(spec, &format!("{}:{name}", spec.kind.name()), *k);
        for &r in &spec.r_grid {
            let row = [
                r.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                curve.evaluate(r).to_string(),
                String::new(),
                String::new(),
                seed.clone(),
            ];
            w.write_record(head.iter().chain(row.iter()))?;
        }
    }
    w.flush()?;
    Ok(w.into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?)
}

/// The JSON summary written next to the CSV.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub spec: ResolvedSpec,
    pub workers: Option<usize>,
    pub wall_seconds: f64,
    pub passed: bool,
    pub violations: Vec<String>,
    pub statistic: Option<StatisticSummary>,
    pub tail: Option<TailCurveEstimate>,
    pub details: Value,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub outcome: ExperimentOutcome,
    pub summary: RunSummary,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
}

fn output_paths(spec: &ResolvedSpec, options: &RunOptions) -> (PathBuf, PathBuf) {
    let csv = options
        .output_path
        .clone()
        .or_else(|| spec.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", spec.kind.name())));
    let json = csv.with_extension("summary.json");
    (csv, json)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Validates the spec, runs it and writes the CSV and JSON reports.
pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<RunReport> {
    let resolved = spec.resolve()?;
    let started = Instant::now();
    let outcome = simulate(&resolved, options)?;
    let wall_seconds = started.elapsed().as_secs_f64();
    let summary = RunSummary {
        spec: resolved.clone(),
        workers: options.workers,
        wall_seconds,
        passed: outcome.passed(),
        violations: outcome.violations.clone(),
        statistic: outcome.statistic_summary(),
        tail: outcome.tail.clone(),
        details: outcome.details.clone(),
    };
    let (csv_path, json_path) = output_paths(&resolved, options);
    write_file(&csv_path, &render_csv(&outcome)?)?;
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_file(&json_path, &json)?;
    Ok(RunReport {
        csv_path,
        json_path,
        outcome,
        summary,
    })
}
