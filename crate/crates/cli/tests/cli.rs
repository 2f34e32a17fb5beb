use std::path::Path;
use std::process::{Command, Output};

fn cmlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmlab(&["selftest"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn bounds_prints_raw_and_clamped_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmlab(&["bounds", "--kind", "kac-esd", "--k", "25", "--r", "0,4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,bound,clamped");
    assert_eq!(lines[1], "0,60,1");
    let fields: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((fields[1] - 1.7485915866745).abs() < 1e-9);
    assert_eq!(fields[2], 1.0);

    let o = cmlab(&["bounds", "--kind", "thermo-esd", "--r", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = cmlab(&["bounds", "--kind", "kac-esd", "--k", "4", "--r", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gap_audit_on_two_sites() {
    let dir = tempfile::tempdir().unwrap();
    let o = cmlab(&["gap-audit", "--n", "2", "--q", "0.4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["exactGap"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = cmlab(&["gap-audit", "--n", "40", "--q", "0.4"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_specs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{not json"),
        ("unknown.json", r#"{"kind": "kac-esd", "colour": "red"}"#),
        ("order.json", r#"{"kind": "kac-esd", "n": 10, "k": 11}"#),
    ];
    for (name, body) in cases {
        std::fs::write(dir.path().join(name), body).unwrap();
        let o = cmlab(&["run", name], dir.path());
        assert_eq!(o.status.code(), Some(2), "{name}");
    }
    let o = cmlab(&["run", "missing.json"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    let o = cmlab(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_writes_reports_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("kac.json"),
        r#"{"kind": "kac-esd", "n": 12, "k": 6, "replicas": 60, "pilotReplicas": 100}"#,
    )
    .unwrap();
    let o = cmlab(&["run", "kac.json", "--workers", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
    let csv = std::fs::read_to_string(dir.path().join("kac-esd.csv")).unwrap();
    assert!(dir.path().join("kac-esd.summary.json").exists());
    assert!(csv.lines().nth(1).unwrap().ends_with(",20240917"));

    let o = cmlab(
        &["run", "kac.json", "--seed", "5", "--output", "seeded.csv", "--r-grid", "0,0.5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("seeded.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",5")));
}

#[test]
fn bounds_audit_flags_the_midpoint_norm() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("audit.json"),
        r#"{"kind": "bounds-audit", "n": 10, "pilotReplicas": 100, "stateSamples": 40, "innerSamples": 400}"#,
    )
    .unwrap();
    let o = cmlab(&["run", "audit.json"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("VIOLATION"));
    assert!(stdout(&o).contains("asep"));
}
