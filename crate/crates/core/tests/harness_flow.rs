use cmlab_core::harness::{
    estimate_expected_esd, render_csv, run_experiment, simulate, ExperimentKind, ExperimentSpec,
    RunOptions, SeedMatrixKind, CSV_HEADER,
};
use cmlab_core::matcore::kolmogorov_distance;
use cmlab_core::Error;

fn small_kac() -> ExperimentSpec {
    ExperimentSpec {
        n: Some(12),
        k: Some(6),
        replicas: Some(80),
        pilot_replicas: Some(100),
        ..ExperimentSpec::new(ExperimentKind::KacEsd)
    }
}

fn options(workers: usize) -> RunOptions {
    RunOptions {
        workers: Some(workers),
        output_path: None,
    }
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("nested/out.csv");
    let report = run_experiment(
        &small_kac(),
        &RunOptions {
            workers: Some(2),
            output_path: Some(csv.clone()),
        },
    )
    .unwrap();
    assert_eq!(report.csv_path, csv);
    assert_eq!(report.json_path, dir.path().join("nested/out.summary.json"));

    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), report.outcome.spec.r_grid.len());
    for row in &rows {
        assert_eq!(&row[0], "kac-esd");
        assert_eq!(&row[15], "80");
        let p: f64 = row[10].parse().unwrap();
        let (lo, hi): (f64, f64) = (row[11].parse().unwrap(), row[12].parse().unwrap());
        assert!(lo <= p && p <= hi);
    }

    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report.json_path).unwrap()).unwrap();
    assert_eq!(summary["passed"], serde_json::Value::Bool(report.passed()));
    assert_eq!(summary["spec"]["n"], 12);
    assert_eq!(summary["statistic"]["count"], 80);
}

#[test]
fn outputs_depend_only_on_the_spec() {
    let spec = small_kac().resolve().unwrap();
    let a = render_csv(&simulate(&spec, &options(1)).unwrap()).unwrap();
    let b = render_csv(&simulate(&spec, &options(4)).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = ExperimentSpec {
        master_seed: Some(99),
        ..small_kac()
    }
    .resolve()
    .unwrap();
    let c = render_csv(&simulate(&other, &options(1)).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn asep_runs_are_reproducible() {
    let spec = ExperimentSpec {
        n: Some(20),
        replicas: Some(40),
        burn_in: Some(20_000),
        ..ExperimentSpec::new(ExperimentKind::AsepLis)
    }
    .resolve()
    .unwrap();
    let a = simulate(&spec, &options(1)).unwrap();
    let b = simulate(&spec, &options(3)).unwrap();
    assert_eq!(a.statistics, b.statistics);
    assert!(a.statistics.iter().all(|&l| (0.0..=20.0).contains(&l)));
}

#[test]
fn invalid_specs_are_config_errors() {
    let bad = ExperimentSpec {
        k: Some(13),
        ..small_kac()
    };
    assert!(matches!(bad.resolve(), Err(Error::Config(_))));
    assert!(matches!(
        ExperimentSpec::from_json_str(r#"{"kind": "kac-esd", "bogus": 1}"#),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        ExperimentSpec::from_json_str(r#"{"kind": "asep-midpoint", "n": 21}"#).unwrap().resolve(),
        Err(Error::Config(_))
    ));
    let workers = RunOptions {
        workers: Some(0),
        output_path: None,
    };
    assert!(simulate(&small_kac().resolve().unwrap(), &workers).is_err());
}

#[test]
fn pilot_estimate_is_stable() {
    let base = ExperimentSpec {
        n: Some(20),
        k: Some(10),
        ..ExperimentSpec::new(ExperimentKind::KacEsd)
    };
    let small = ExperimentSpec {
        pilot_replicas: Some(2000),
        ..base.clone()
    }
    .resolve()
    .unwrap();
    let large = ExperimentSpec {
        pilot_replicas: Some(4000),
        ..base
    }
    .resolve()
    .unwrap();
    let a = estimate_expected_esd(&small, None).unwrap();
    let b = estimate_expected_esd(&large, None).unwrap();
    assert!(kolmogorov_distance(&a, &b) <= 0.05);
}

#[test]
fn degenerate_seeds_give_unit_steps() {
    for (kind, at) in [(SeedMatrixKind::Identity, 1.0), (SeedMatrixKind::Zero, 0.0)] {
        let spec = ExperimentSpec {
            seed_matrix: Some(kind),
            ..small_kac()
        }
        .resolve()
        .unwrap();
        let f = estimate_expected_esd(&spec, Some(1)).unwrap();
        assert_eq!(f.evaluate(at - 1e-9), 0.0);
        assert_eq!(f.evaluate(at), 1.0);
        let out = simulate(&spec, &options(1)).unwrap();
        assert!(out.statistics.iter().all(|&s| s == 0.0));
    }
}

#[test]
fn gap_audit_reports_exact_gap() {
    let spec = ExperimentSpec {
        n: Some(6),
        q: Some(0.5),
        ..ExperimentSpec::new(ExperimentKind::AsepGap)
    }
    .resolve()
    .unwrap();
    let out = simulate(&spec, &options(1)).unwrap();
    assert!(out.passed());
    assert_eq!(out.details["states"], 20);
    let text = String::from_utf8(render_csv(&out).unwrap()).unwrap();
    assert_eq!(text.lines().count(), 1);
}
