use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use weakgrad::io::parse17;
use weakgrad::modulus::{MeasureSpec, ModulusResult};
use weakgrad::weight::{ConstructionParams, WeightSequence};
use weakgrad::Interval;

fn weakgrad(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakgrad")).args(args).arg("--out").arg(out).output().expect("spawn weakgrad")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = weakgrad(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// CSV rows as string cells, header dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn single_stage_table() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["build", "--stages", "1"]);
    let text = read(dir.path(), "stage_table.csv");
    assert_eq!(text.lines().next(), Some("k,q_num,q_den,epsilon,L,R,r"));
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert_eq!(parse17(&r[0][4]), Some(1.0));
    assert_eq!((r[0][1].as_str(), r[0][2].as_str()), ("1", "2"));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["build", "--alpha", "0"],
        vec!["build", "--window", "1", "0"],
        vec!["ap-scan", "--p", "1"],
        vec!["audit", "--p", "1.5"],
        vec!["modulus", "--measure", missing.to_str().unwrap()],
        vec!["build", "--no-such-flag"],
        vec!["integrability", "--s", "1", "--theta", "2"],
    ];
    for args in cases {
        assert_eq!(code(&weakgrad(dir.path(), &args)), 2, "{args:?}");
    }
}

#[test]
fn malformed_measure_exits_2() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.json");
    fs::write(&m, r#"{"density":[{"from":0,"to":1,"center":0,"coeff":1,"exponent":1}],"bogus":1}"#).unwrap();
    assert_eq!(code(&weakgrad(dir.path(), &["np-classify", "--measure", m.to_str().unwrap()])), 2);
}

#[test]
fn resolution_loss_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = weakgrad(dir.path(), &["build", "--epsilon-rule", "geometric", "--stages", "200"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let runs: [&[&str]; 4] = [
        &["build", "--stages", "50"],
        &["ap-scan", "--stages", "30", "--p", "1.5", "3", "--scale-depth", "8"],
        &["mc-check", "--stages", "30", "--p", "1.5", "--samples", "50000", "--seed", "7"],
        &["modulus", "--stages", "10", "--p", "3", "--cells", "128"],
    ];
    for args in runs {
        ok(a.path(), args);
        ok(b.path(), args);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8, "{names:?}");
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn stage_table_matches_library() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["build", "--stages", "50", "--alpha", "0.5", "--window", "-1", "3"]);
    let seq = WeightSequence::build(ConstructionParams::new(0.5, Interval::new(-1.0, 3.0).unwrap(), 50)).unwrap();
    assert_eq!(read(dir.path(), "stage_table.csv"), seq.stage_table_csv());
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "weight_summary.json")).unwrap();
    let params: ConstructionParams = serde_json::from_value(summary["params"].clone()).unwrap();
    assert_eq!(params, seq.params);
    assert_eq!(summary["failed_audits"], serde_json::json!([]));
}

#[test]
fn ap_scan_inf_rows_only_below_threshold() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["ap-scan", "--stages", "50", "--p", "1.5", "3", "--scale-depth", "10"]);
    let low = rows(&read(dir.path(), "ap_scan_p1.5.csv"));
    assert!(low.iter().any(|r| r[2] == "inf"));
    let high = rows(&read(dir.path(), "ap_scan_p3.csv"));
    assert!(!high.is_empty());
    for r in &high {
        let v = parse17(&r[2]).unwrap();
        assert!(v.is_finite() && v >= 1.0 - 1e-12, "{r:?}");
    }
}

#[test]
fn audit_flags_hold() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["audit", "--stages", "40", "--p", "3", "--scale-depth", "8"]);
    let r = rows(&read(dir.path(), "audit_p3.csv"));
    assert_eq!(r.len(), 41);
    assert!(r.iter().all(|row| row[3] == "true"));
}

#[test]
fn integrability_divergence_rule() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["integrability", "--stages", "30", "--scale-depth", "6"]);
    for r in rows(&read(dir.path(), "integrability.csv")) {
        assert_eq!(r[3] == "inf", r[2] == "true", "{r:?}");
    }
    ok(dir.path(), &["integrability", "--stages", "30", "--scale-depth", "6", "--s", "0.5"]);
    assert!(rows(&read(dir.path(), "integrability.csv")).iter().all(|r| r[3] != "inf"));
    ok(dir.path(), &["integrability", "--stages", "30", "--scale-depth", "6", "--theta", "2"]);
    assert!(rows(&read(dir.path(), "integrability.csv")).iter().all(|r| r[3] != "inf"));
    ok(dir.path(), &["integrability", "--stages", "30", "--scale-depth", "6", "--theta", "1"]);
    for r in rows(&read(dir.path(), "integrability.csv")) {
        assert_eq!(r[3] == "inf", r[2] == "true", "{r:?}");
    }
}

#[test]
fn modulus_output_roundtrips() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("lebesgue.json");
    fs::write(&m, MeasureSpec::lebesgue().to_json(Interval::new(-1.0, 3.0).unwrap()).unwrap()).unwrap();
    let fam = dir.path().join("family.json");
    fs::write(&fam, "[[0, 1], [0, 2]]").unwrap();
    ok(
        dir.path(),
        &["modulus", "--measure", m.to_str().unwrap(), "--interval", "0", "2", "--p", "2", "--cells", "2048"],
    );
    let r: ModulusResult = serde_json::from_str(&read(dir.path(), "modulus_p2.json")).unwrap();
    assert!((r.value.to_f64() - 0.5).abs() <= 0.01, "{r:?}");
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "modulus.json")).unwrap();
    assert_eq!(summary[0]["exact"], serde_json::json!(0.5));

    ok(dir.path(), &["modulus", "--measure", m.to_str().unwrap(), "--family", fam.to_str().unwrap(), "--p", "2"]);
    let r: ModulusResult = serde_json::from_str(&read(dir.path(), "modulus_p2.json")).unwrap();
    assert!((r.value.to_f64() - 1.0).abs() <= 0.01 && r.converged, "{r:?}");
}

#[test]
fn np_and_gradient_through_files() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.json");
    fs::write(
        &m,
        r#"{"density":[{"from":-1,"to":1,"center":0,"coeff":1,"exponent":1}],"atoms":[{"at":0.5,"mass":2}]}"#,
    )
    .unwrap();
    let f = dir.path().join("f.json");
    fs::write(&f, r#"{"breakpoints":[0.25],"slopes":[2,-3],"value_at_left":0}"#).unwrap();
    let (m, f) = (m.to_str().unwrap(), f.to_str().unwrap());
    ok(dir.path(), &["np-classify", "--measure", m, "--interval", "-1", "1", "--p", "1.5", "3"]);
    let low: serde_json::Value = serde_json::from_str(&read(dir.path(), "np_p1.5.json")).unwrap();
    assert_eq!(low["points"][0]["location"], serde_json::json!(0.0));
    let high: serde_json::Value = serde_json::from_str(&read(dir.path(), "np_p3.json")).unwrap();
    assert_eq!(high["points"], serde_json::json!([]));

    ok(
        dir.path(),
        &["gradient", "--measure", m, "--function", f, "--interval", "-1", "1", "--p", "1.5", "--samples", "5"],
    );
    let text = read(dir.path(), "gradient_p1.5.csv");
    assert_eq!(text.lines().next(), Some("x,in_Np,is_atom,grad"));
    let r = rows(&text);
    let at = |x: f64| r.iter().find(|row| parse17(&row[0]) == Some(x)).unwrap_or_else(|| panic!("no row at {x}"));
    assert_eq!(at(0.0)[3], "0.0000000000000000e0");
    assert_eq!(at(-0.5)[3], "2.0000000000000000e0");
    assert_eq!(at(0.5)[2], "true");
    assert_eq!(parse17(&at(0.5)[3]), Some(0.0));
    assert_eq!(parse17(&at(1.0)[3]), Some(3.0));
    assert!(r.iter().all(|row| parse17(&row[0]) != Some(0.25)), "kink should be skipped");
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, r#"{"alpha": 1.0, "stages": 3, "window": [0, 1], "out": "from_config"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_weakgrad"))
        .args(["build", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&read(&dir.path().join("from_config"), "stage_table.csv")).len(), 3);

    ok(dir.path(), &["build", "--config", cfg.to_str().unwrap(), "--stages", "5"]);
    assert_eq!(rows(&read(dir.path(), "stage_table.csv")).len(), 5);

    fs::write(&cfg, r#"{"stages": 3, "unknown": true}"#).unwrap();
    assert_eq!(code(&weakgrad(dir.path(), &["build", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn mc_check_bound_holds() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["mc-check", "--stages", "50", "--p", "1.5", "--samples", "100000", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "mc_check.json")).unwrap();
    assert_eq!(v[0]["holds"], serde_json::json!(true));
    assert_eq!(v[0]["samples"], serde_json::json!(100000));
}
