use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn etc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etconsensus")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn metrics(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const UNBALANCED: &str = r#"
name = "lopsided"
horizon = 5.0
x0 = [1.0, 0.0, -1.0]
sigma = 0.5

[graph]
n = 3
edges = [{ from = 1, to = 2 }, { from = 2, to = 3 }, { from = 3, to = 1, weight = 2.0 }]
"#;

#[test]
fn run_writes_trace_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let o = etc(&["run", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bound holds"));
    let m = metrics(&dir.path().join("fig2.metrics.json"));
    assert!(m["final_disagreement"].as_f64().unwrap() < 1e-3);
    let trace = fs::read_to_string(dir.path().join("fig2.trace.csv")).unwrap();
    assert!(trace.starts_with("t,kind,agent,x1,x2,x3,x4,x5,V,N_E\n"));
    assert!(trace.lines().any(|l| l.contains(",trigger,")));
}

#[test]
fn laplacian_override_counts_every_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = etc(&["run", "fig2", "--mode", "periodic-laplacian", "--h", "0.1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = metrics(&dir.path().join("fig2.metrics.json"));
    assert_eq!(m["event_count"], 2500);
    assert!(m["mode"] == "periodic-laplacian");
}

#[test]
fn cooldown_can_be_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(etc(&["run", "fig2", "--out", out]).status.success());
    let with = metrics(&dir.path().join("fig2.metrics.json"))["event_count"].as_u64().unwrap();
    assert!(etc(&["run", "fig2", "--no-cooldown", "--out", out]).status.success());
    let without = metrics(&dir.path().join("fig2.metrics.json"))["event_count"].as_u64().unwrap();
    assert!(without < with, "{without} vs {with}");
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lopsided.scenario");
    fs::write(&path, UNBALANCED).unwrap();
    let p = path.to_str().unwrap();

    let o = etc(&["validate", p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weight-balanced"));

    let o = etc(&["validate", p, "--allow-unbalanced"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("warning"));

    let bad_eps = fs::read_to_string(env!("CARGO_MANIFEST_DIR").to_owned() + "/scenarios/fig2.scenario").unwrap()
        + "epsilon = [5.0, 5.0, 5.0, 5.0, 5.0]\n";
    let eps_path = dir.path().join("eps.scenario");
    fs::write(&eps_path, bad_eps).unwrap();
    assert_eq!(etc(&["validate", eps_path.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(etc(&["validate", "fig3", "--sufficiency", "reject"]).status.code(), Some(1));
    assert_eq!(etc(&["validate", "fig3", "--h", "0.02", "--sufficiency", "reject"]).status.code(), Some(0));
    assert_eq!(etc(&["run", "fig2", "--sigma", "1.5"]).status.code(), Some(1));
}

#[test]
fn missing_scenario_is_a_runtime_error() {
    let o = etc(&["run", "no-such-scenario"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig2"));
}

#[test]
fn sweep_reports_ordered_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = etc(&["sweep", "fig3", "--sigma", "0.2,0.5,0.8", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("fig3.sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let sigmas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(sigmas, [0.2, 0.5, 0.8]);
    let counts: Vec<usize> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(counts[0] > counts[1] && counts[1] > counts[2], "{counts:?}");
    assert!(rows.iter().all(|r| r[2] == "ok"));
    for label in ["fig3_sigma0.2", "fig3_sigma0.5", "fig3_sigma0.8"] {
        assert!(dir.path().join(format!("{label}.trace.csv")).exists(), "{label}");
    }
}

#[test]
fn sweep_keeps_going_past_failed_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = etc(&["sweep", "fig3", "--sigma", "0.5,1.2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let table = fs::read_to_string(dir.path().join("fig3.sweep.csv")).unwrap();
    let status: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(status, ["ok", "failed"]);
    assert_eq!(etc(&["sweep", "fig3"]).status.code(), Some(1));
}

#[test]
fn spectral_prints_certificate() {
    let o = etc(&["spectral", "fig2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("lambda2    8.2460947032089"), "{s}");
    assert!(s.contains("d_min_out  1.0000000000000000e0"));
    let o = etc(&["spectral", "switching"]);
    assert!(stdout(&o).contains("union"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| {
        let out = dir.path().join(sub);
        assert!(etc(&["run", "fig3", "--out", out.to_str().unwrap()]).status.success());
        (fs::read(out.join("fig3.trace.csv")).unwrap(), fs::read(out.join("fig3.metrics.json")).unwrap())
    };
    assert_eq!(read("a"), read("b"));
}
