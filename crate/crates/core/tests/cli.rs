use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const LINEAR: &str = r#"
command = "eigen"

[domain]
kind = "interval"
extents = [1.0]
resolution = 256

[system]
m = 2
"#;

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_lane-emden"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eigen_reports_pi_to_the_fourth() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), LINEAR, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("out/eigen.json"));
    let ls = v["eigen"]["lambda_star"].as_f64().unwrap();
    assert!((ls - PI.powi(4)).abs() / PI.powi(4) < 5e-3, "{ls}");
    let csv = fs::read_to_string(tmp.path().join("out/eigenfunctions.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,phi1,phi2"));
    assert_eq!(csv.lines().count(), 256);
}

#[test]
fn identical_configs_give_identical_json() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(a.path(), LINEAR, &[]).status.success());
    assert!(run(b.path(), LINEAR, &[]).status.success());
    let x = fs::read(a.path().join("out/eigen.json")).unwrap();
    let y = fs::read(b.path().join("out/eigen.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn sweep_shows_length_scaling() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{}\n[sweep]\nscales = [1.0, 0.5, 0.25, 0.125]\n", LINEAR.replace("\"eigen\"", "\"sweep\""));
    let o = run(tmp.path(), &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("measure,lambda_star,lower,upper"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], 0.5f64.powi(k as i32));
        let expect = PI.powi(4) * 16f64.powi(k as i32);
        assert!((row[1] - expect).abs() / expect < 1e-2, "row {k}: {}", row[1]);
        assert!(row[2] <= row[1]);
    }
}

#[test]
fn bad_exponent_product_fails_at_parse_time() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &LINEAR.replace("m = 2", "m = 2\nalpha = [2.0, 0.4]"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("error[config]") && err.contains("system.alpha"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn expression_errors_name_the_column() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &LINEAR.replace("m = 2", "m = 2\nweights = [\"1 + * x\"]"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("column 5"), "{err}");
}

#[test]
fn missing_config_is_an_io_error() {
    let o =
        Command::new(env!("CARGO_BIN_EXE_lane-emden")).args(["--config", "/nonexistent/run.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), LINEAR, &["--command", "bounds", "--resolution", "64", "--tol", "1e-8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("out/bounds.json"));
    assert_eq!(v["domain"]["resolution"][0], 64);
    assert_eq!(v["lower"]["bound"], "linf_lower");
    assert!(v["lower"]["lower"].as_f64().unwrap() > 0.0);
    let bad = run(tmp.path(), LINEAR, &["--command", "plot"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_passes_on_a_small_weighted_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
command = "verify"

[domain]
kind = "ball"
extents = [0.2]
dim = 2
resolution = 128

[system]
m = 2
weights = ["1 + r^2"]

[verify]
probe = [1.0, 1.0]
"#;
    let o = run(tmp.path(), cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("out/verify.json"));
    assert_eq!(v["status"], "PASS");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "PASS"), "{checks:?}");
    assert_eq!(v["probe"]["wmp"], true);
}

#[test]
fn navier_writes_chain_and_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
command = "navier"

[domain]
kind = "ball"
extents = [1.0]
dim = 2
resolution = 128

[system]
m = 2

[bounds]
radius = 0.9

[navier]
lambda = 0.0
"#;
    let o = run(tmp.path(), cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("out/navier.json"));
    let l = v["navier"]["lambda1"].as_f64().unwrap();
    assert!((l - 33.446).abs() / 33.446 < 1e-2, "{l}");
    assert_eq!(v["sandwich"]["contains_lambda1"], true);
    assert_eq!(v["smp"]["verdict"], true);
    let csv = fs::read_to_string(tmp.path().join("out/chain.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,j0,j1"));
}
