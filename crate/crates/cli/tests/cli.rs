use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_modlab"));
    c.env_remove("MODLAB_JOBS");
    c
}

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("instances").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn f(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        Value::Number(n) => n.to_string().parse().expect("number"),
        other => panic!("not a number: {other}"),
    }
}

fn column(table: &str, index: usize) -> Vec<f64> {
    table.lines().skip(1).map(|l| l.split('\t').nth(index).unwrap().parse().unwrap()).collect()
}

#[test]
fn interval_modulus_is_one() {
    let path = instance("interval.json");
    let out = run(&["compute", "--task", "modulus", "--p", "1", "--instance", path.to_str().unwrap()]);
    let report = json(&out);
    assert_eq!(report["schema"], "modlab.report/1");
    let value = f(&report["results"]["value"]);
    assert!((value - 1.0).abs() <= 1e-9, "{value}");
    let r = &report["results"]["residuals"];
    assert!(f(&r["primal"]) <= 1e-8 && f(&r["gap"]) <= 1e-8);
}

#[test]
fn random_duality_passes() {
    let out = run(&["duality", "--p", "1", "--random", "50", "--seed", "7"]);
    let report = json(&out);
    assert_eq!(report["instances"].as_array().unwrap().len(), 50);
    assert!(f(&report["results"]["max_gap"]) <= 1e-6);
    assert_eq!(report["pass"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("max gap"));
}

#[test]
fn unknown_key_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.instance");
    let text = std::fs::read_to_string(instance("small.json")).unwrap().replacen("\"task\"", "\"colour\": 1, \"task\"", 1);
    std::fs::write(&bad, text).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.trim().lines().count() == 1, "{err}");

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["validate", missing.to_str().unwrap()]).status.code(), Some(1));
    let good = run(&["validate", instance("small.json").to_str().unwrap()]);
    assert_eq!(json(&good)["valid"], true);
}

#[test]
fn bad_flags_are_schema_errors() {
    let path = instance("small.json");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["compute", "--instance", p, "--class", "smooth"]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--instance", p, "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["counterexample", "spiral"]).status.code(), Some(2));
    assert_eq!(run(&["counterexample", "doubling", "--set", "colour=1"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing");
        serde_json::to_string(&v).unwrap()
    };
    for args in [
        vec!["compute".to_string(), "--instance".into(), instance("strips.json").to_string_lossy().into_owned()],
        vec!["duality".into(), "--p".into(), "2".into(), "--random".into(), "5".into(), "--seed".into(), "3".into()],
        vec!["counterexample".into(), "construction".into(), "--seed".into(), "11".into(), "--set".into(), "candidates=4".into()],
    ] {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let one = strip(json(&run(&a)));
        let mut parallel = a.clone();
        parallel.extend(["--jobs", "3"]);
        assert_eq!(one, strip(json(&run(&a))), "{args:?}");
        assert_eq!(one, strip(json(&run(&parallel))), "{args:?}");
    }
}

#[test]
fn infinite_values_carry_certificates() {
    let path = instance("boundary-diracs.json");
    let report = json(&run(&["compute", "--instance", path.to_str().unwrap()]));
    let results = &report["results"];
    assert_eq!(results["value"], "inf");
    assert_eq!(results["certificate"]["kind"], "farkas");
    assert!(results["certificate"]["digest"].as_str().unwrap().starts_with("sha256:"));
    // without the boundary condition the value is the total mass
    let all = json(&run(&["compute", "--instance", path.to_str().unwrap(), "--class", "all"]));
    assert!((f(&all["results"]["value"]) - 0.484375).abs() <= 1e-12);
}

#[test]
fn out_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run(&["compute", "--instance", instance("small.json").to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn k_sweep_on_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep", "--instance", instance("interval.json").to_str().unwrap(), "--param", "k", "--values", "1..10"])
        .args(["--plot-dir", dir.path().to_str().unwrap()])
        .env("MODLAB_JOBS", "4")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    let m = column(&table, 1);
    assert_eq!(m.len(), 10);
    assert!(m.iter().all(|v| (v - 1.0).abs() <= 1e-6), "{m:?}");
    let plot = std::fs::read_to_string(dir.path().join("k-modulus.dat")).unwrap();
    assert_eq!(plot.lines().count(), 10);
    assert!(plot.lines().all(|l| l.split(' ').count() == 2));
}

#[test]
fn lipschitz_sweep_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("lip.json");
    std::fs::write(
        &inst,
        r#"{
          "schema": "modlab.instance/1",
          "space": { "kind": "grid1d", "n": 32 },
          "family": { "kind": "restrictions", "subsets": [[3], [10, 11], [20, 21, 22, 23], [30]] }
        }"#,
    )
    .unwrap();
    let out = run(&["sweep", "--instance", inst.to_str().unwrap(), "--param", "L", "--values", "2^0..2^10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = column(&String::from_utf8(out.stdout).unwrap(), 1);
    assert_eq!(m.len(), 11);
    assert!(m.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{m:?}");
    assert!(m[0] > m[10]);
}

#[test]
fn grid_sweep_on_radial_family() {
    // grid is the number of cells per side
    let path = instance("radial.json");
    let out = run(&["sweep", "--instance", path.to_str().unwrap(), "--param", "grid", "--values", "2^3..2^6", "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = column(&String::from_utf8(out.stdout).unwrap(), 1);
    assert!(m.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{m:?}");
}

#[test]
fn am_bracket_on_construction() {
    let report = json(&run(&["compute", "--instance", instance("construction.json").to_str().unwrap()]));
    let r = &report["results"];
    assert!(f(&r["lower"]) <= f(&r["upper"]) + 1e-9);
    assert!(f(&r["upper"]) <= 1.0 + 1e-9);
}

#[test]
fn suites_pass() {
    for (name, extra) in [
        ("interval", vec!["--set", "grid=1024", "--set", "kmax=8"]),
        ("nonouter", vec![]),
        ("construction", vec!["--seed", "2024"]),
        ("doubling", vec![]),
        ("increasing", vec!["--seed", "5"]),
    ] {
        let mut args = vec!["counterexample", name];
        args.extend(extra);
        let report = json(&run(&args));
        assert_eq!(report["suite"], name);
        assert_eq!(report["pass"], true, "{name}: {}", report["checks"]);
    }
}
