use std::fs;

use assert_cmd::Command;
use serde_json::Value;

fn sqztomo() -> Command {
    let mut c = Command::cargo_bin("sqztomo").unwrap();
    c.env_remove("SQZTOMO_DEFAULT_CUTOFF");
    c
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn vacuum_closed_form_grid() {
    let out = sqztomo().args(["tomogram", "--state", "vacuum", "--lambda", "0:1:0.1", "--route", "closed_form"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["config"]["route"], "closed_form");
    let g = &v["grids"][0];
    let lambdas = floats(&g["lambda_grid"]);
    assert_eq!(lambdas.len(), 11);
    for (i, &l) in lambdas.iter().enumerate() {
        let row = floats(&g["values"][i]);
        let p0 = 1.0 / l.cosh();
        assert!((row[0] - p0).abs() < 1e-14);
        // W(2) = tanh^2 / (2 cosh)
        assert!((row[2] - 0.5 * l.tanh().powi(2) / l.cosh()).abs() < 1e-14);
        assert_eq!(row[1], 0.0);
    }
}

#[test]
fn fock_identity_column() {
    let out = sqztomo().args(["tomogram", "--state", "fock:1", "--lambda", "0", "--route", "oracle"]).output().unwrap();
    assert!(out.status.success());
    let row = floats(&json(&out.stdout)["grids"][0]["values"][0]);
    for (n, w) in row.iter().enumerate() {
        assert!((w - if n == 1 { 1.0 } else { 0.0 }).abs() < 1e-12);
    }
}

#[test]
fn output_is_deterministic_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        sqztomo()
            .args(["tomogram", "--state", "cat:1+0.5j:-", "--lambda", "-0.5:0.5:0.25", "--theta", "0,0.7", "--n-max", "10"])
            .args(["--format", "csv", "--out"])
            .arg(p)
            .assert()
            .success();
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# config: {"));
    assert!(text.contains("\ntheta,lambda,n,W,tail_mass\n"));
    assert_eq!(text.matches("\n\n").count(), 10);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"cutoff": 60, "n_max": 6, "state": "coherent:1", "lambda": "0:0.2:0.1", "route": "closed_form"}"#).unwrap();
    let out = sqztomo().arg("tomogram").arg("--config").arg(&cfg).args(["--n-max", "3"]).output().unwrap();
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["config"]["cutoff"], 60);
    assert_eq!(v["config"]["n_max"], 3);
    assert_eq!(floats(&v["config"]["lambda"]).len(), 3);
    assert_eq!(v["config"]["state"]["kind"], "coherent");

    let out = sqztomo().env("SQZTOMO_DEFAULT_CUTOFF", "70").args(["tomogram", "--state", "vacuum", "--n-max", "2"]).output().unwrap();
    assert_eq!(json(&out.stdout)["config"]["cutoff"], 70);
    let out = sqztomo()
        .env("SQZTOMO_DEFAULT_CUTOFF", "70")
        .arg("tomogram")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(json(&out.stdout)["config"]["cutoff"], 60);

    fs::write(&cfg, r#"{"cutof": 60}"#).unwrap();
    sqztomo().arg("tomogram").arg("--config").arg(&cfg).assert().code(2);
}

#[test]
fn exit_codes() {
    sqztomo().args(["tomogram", "--state", "vacuum", "--cutoff", "20", "--n-max", "30"]).assert().code(2);
    sqztomo().args(["tomogram", "--state", "squeezed:1"]).assert().code(2);
    sqztomo().args(["tomogram", "--state", "vacuum", "--lambda", "1:0:0.1"]).assert().code(2);
    sqztomo().args(["tomogram", "--state", "vacuum", "--route", "magic"]).assert().code(2);
    sqztomo().args(["tomogram", "--state", "coherent:6", "--cutoff", "40", "--n-max", "10", "--lambda", "1"]).assert().code(3);
    sqztomo().args(["dynamics", "--gamma", "1", "--alpha", "0.5"]).assert().code(2);
    sqztomo().args(["figure", "fig9"]).assert().code(2);
    sqztomo().args(["tomogram", "--state", "vacuum", "--route", "kernel_22", "--form", "literal"]).assert().code(2);
    sqztomo().arg("--bogus").assert().code(2);
}

#[test]
fn diagnostics_on_stderr() {
    let out = sqztomo()
        .args(["tomogram", "--state", "coherent:1", "--route", "kernel_24", "--lambda", "0.3", "--theta", "0.8"])
        .args(["--n-max", "4", "--cutoff", "48"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("level=warn code=tail_mass op=tomogram value=")));
}

#[test]
fn transform_reports_oracle_deviation() {
    let out = sqztomo()
        .args(["transform", "--from", "density", "--state", "coherent:1", "--lambda", "0.5", "--theta", "1.0"])
        .args(["--n-max", "6", "--cutoff", "48"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["grids"][0]["route"], "kernel_22");
    assert!(floats(&v["grids"][0]["oracle_deviation"])[0] < 1e-9);

    let out = sqztomo()
        .args(["transform", "--from", "density", "--form", "literal", "--state", "coherent:1"])
        .args(["--lambda", "0.5", "--theta", "1.0", "--n-max", "6", "--cutoff", "48"])
        .output()
        .unwrap();
    assert!(floats(&json(&out.stdout)["grids"][0]["oracle_deviation"])[0] > 1e-3);
}

#[test]
fn dynamics_writes_audit_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    sqztomo()
        .args(["dynamics", "--gamma", "0", "--alpha", "1+0j", "--t-points", "41", "--q-points", "61", "--out"])
        .arg(&out)
        .assert()
        .success();
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["grid"]["density"].as_array().unwrap().len(), 41);
    let audit: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json.audit.json")).unwrap()).unwrap();
    assert!(audit["audit"]["constancy_drift"].as_f64().unwrap() <= 1e-6);
    assert_eq!(audit["moments"].as_array().unwrap().len(), 41);
}

#[test]
fn figure_two_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    sqztomo().args(["figure", "fig2", "--format", "csv", "--out"]).arg(&out).assert().success();
    let text = fs::read_to_string(&out).unwrap();
    let rows = text.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 61 * 41);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fig2.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["figure"], "fig2");
    assert_eq!(meta["parameters"]["state"]["alpha"][0].as_f64(), Some(3.0));
}

#[test]
fn dump_operator() {
    let out = sqztomo().args(["dump", "--operator", "annihilation", "--dim", "4"]).output().unwrap();
    let v = json(&out.stdout);
    assert_eq!(v["dim"], 4);
    let m = &v["matrix"];
    assert!((m[1][2][0].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(m[2][1][0].as_f64(), Some(0.0));
}

#[test]
fn quick_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqztomo().args(["verify", "--quick", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let md = fs::read_to_string(dir.path().join("VERIFICATION.md")).unwrap();
    assert!(md.contains("0 mandatory failure(s)"));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verification.json")).unwrap()).unwrap();
    assert!(v["rows"].as_array().unwrap().iter().filter(|r| r["mandatory"] == true).all(|r| r["status"] == "pass"));
}
