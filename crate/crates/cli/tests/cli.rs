use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gauss-distill"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gauss-distill")
}

fn csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn nested_writes_squared_epsilons_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested.csv");
    let o = run(&["nested", "--r", "1", "--T", "0.5", "--stages", "3", "--cutoff", "6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = csv(&out);
    assert_eq!(header, "stage,q,C,S,r,T,epsilon,purity,eof,weight,leakage");
    assert_eq!(rows.len(), 3);
    let eps_in = 0.5 * 1f64.tanh();
    for (k, row) in rows.iter().enumerate() {
        let expect = eps_in.powi(1 << (k + 1));
        assert!((row[6] - expect).abs() < 1e-10, "stage {}: {} vs {expect}", k + 1, row[6]);
        assert!((row[4] - 1.0).abs() < 1e-6);
    }
    assert!((rows[0][6] - 0.14501).abs() < 1e-5);
    assert!((rows[1][6] - 0.02103).abs() < 1e-5);
    assert!((rows[2][6] - 0.000442).abs() < 1e-6);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("nested.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "nested");
    assert_eq!(manifest["config"]["stages"], "3");
    assert!(manifest["config"].get("out").is_none());
    assert!(manifest["leakage"]["max"].as_f64().unwrap() > 0.0);
    assert!(manifest["tolerances"]["root"].is_number());
}

#[test]
fn manifest_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let o = run(&["nested", "--T", "0.6", "--stages", "2", "--out", first.to_str().unwrap()]);
    assert!(o.status.success());
    let manifest = dir.path().join("a.csv.manifest.json");
    let o = run(&["nested", "--config", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let o = run(&["figure3", "--config", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn figure3_grid() {
    let o = run(&["figure3", "--eps", "0.1:0.9:0.1", "--stages", "4"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps_in,N,eps_out"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36);
    assert!(rows.contains(&"0.5,2,0.0625"));
    for row in rows {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let expect = v[0].powi(1 << v[1] as i32);
        assert!((v[2] - expect).abs() <= 1e-10 * expect);
    }
}

#[test]
fn figure4_entanglement_grows_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig4.csv");
    let o = run(&["figure4", "--T", "0.2:0.8:0.3", "--stages", "2", "--jobs", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&out);
    assert_eq!(header, "T,N,purity,eof");
    assert_eq!(rows.len(), 9);
    for chain in rows.chunks(3) {
        assert!(chain.windows(2).all(|w| w[0][0] == w[1][0] && w[1][3] > w[0][3]));
    }
}

#[test]
fn output_is_independent_of_worker_count() {
    let a = bin().args(["figure4", "--T", "0.3:0.9:0.3", "--stages", "1"]).env("GAUSS_DISTILL_JOBS", "1").output().unwrap();
    let b = run(&["figure4", "--T", "0.3:0.9:0.3", "--stages", "1", "--jobs", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);

    let bad = bin().args(["figure3"]).env("GAUSS_DISTILL_JOBS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_file_sits_below_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# shared settings\nT = 0.7\nstages = 1\neps = 0.5 # figure3 only\n").unwrap();
    let from_file = run(&["nested", "--config", cfg.to_str().unwrap()]);
    let explicit = run(&["nested", "--T", "0.7", "--stages", "1"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, explicit.stdout);

    let overridden = run(&["nested", "--config", cfg.to_str().unwrap(), "--T", "0.5"]);
    let text = String::from_utf8(overridden.stdout).unwrap();
    let eps: f64 = text.lines().nth(1).unwrap().split(',').nth(6).unwrap().parse().unwrap();
    assert!((eps - (0.5 * 1f64.tanh()).powi(2)).abs() < 1e-10);
}

#[test]
fn stage_accepts_covariance_input() {
    let o = run(&["stage", "--C", "2.38109785", "--S", "1.81343020", "--q", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 1.0);
    assert_eq!(row[1], 1.0);
    assert!((row[6] - 0.14501).abs() < 1e-4);
}

#[test]
fn validate_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["validate", "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(o.status.success(), "{stdout}");
    for name in ["epsilon-invariance", "squaring-law", "purity-formula"] {
        assert!(stdout.contains(&format!("[PASS] {name}")), "{stdout}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn validate_reports_small_cutoff() {
    let o = run(&["validate", "--cutoff", "2", "--lambda", "0.9"]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("[FAIL] cutoff-leakage"));
    assert!(stdout.contains("too small"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["figure3", "--r", "1"],
        vec!["figure3", "--eps", "0.9:0.1:0.1"],
        vec!["nested", "--T", "abc"],
        vec!["nested", "--C", "2"],
        vec!["nested", "--q", "0"],
        vec!["nested", "--stages", "2", "--q", "1"],
        vec!["bogus"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"), "{args:?}");
    }
}
