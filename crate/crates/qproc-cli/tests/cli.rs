//! End-to-end tests of the command-line interface: command output files,
//! byte-identical reruns, and machine-readable errors.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qproc"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qproc_cli_{name}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn optimize_rotation_converges_and_writes_outputs() {
    let dir = workdir("opt");
    let cfg = serde_json::json!({
        "channel": {"type": "rotation", "theta": std::f64::consts::FRAC_PI_2, "axis": "x"},
        "processor": {"type": "teleport", "d": 2},
        "cost": {"kind": "trace"},
        "optimizer": {"method": "ps", "iterations": 500, "seed": 3},
    });
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = dir.join("run");
    let output = bin()
        .args(["optimize", "--config"])
        .arg(&cfg_path)
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(summary["best_cost"].as_f64().unwrap() <= 1e-3);

    let trace = fs::read_to_string(dir.join("run_trace.csv")).unwrap();
    assert!(trace.starts_with("iter,cost,step_norm\n"));
    assert_eq!(trace.lines().count(), 502);
    let program: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("run_program.json")).unwrap()).unwrap();
    assert_eq!(program["rows"], 4);
    let bounds: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("run_bounds.json")).unwrap()).unwrap();
    assert!(bounds["c1"].as_f64().unwrap() <= bounds["cf_bound"].as_f64().unwrap() + 1e-9);
    assert!(dir.join("run_meta.json").exists());
}

#[test]
fn optimize_sweep_is_deterministic_and_beats_baseline() {
    let dir = workdir("sweep");
    let cfg = serde_json::json!({
        "channel": {"type": "amplitude_damping", "p": 0.0},
        "processor": {"type": "pbt", "n_ports": 2},
        "cost": {"kind": "trace"},
        "optimizer": {
            "method": "ps", "iterations": 120, "seed": 9,
            "schedule": {"type": "geometric", "a0": 0.08, "rho": 0.97}
        },
        "sweep": {"param": "p", "values": [0.1, 0.5, 0.9]},
    });
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();

    let run = |out: &str| {
        let output = bin()
            .args(["optimize", "--config"])
            .arg(&cfg_path)
            .args(["--out", dir.join(out).to_str().unwrap()])
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        fs::read_to_string(dir.join(format!("{out}_sweep.csv"))).unwrap()
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first, second, "sweep CSV bodies must be byte-identical");

    let mut lines = first.lines();
    assert_eq!(lines.next().unwrap(), "p,c1_optimized,c1_choi_program");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let optimized: f64 = cols[1].parse().unwrap();
        let baseline: f64 = cols[2].parse().unwrap();
        assert!(optimized <= baseline + 1e-9, "{line}");
    }
}

#[test]
fn diamond_reports_known_value() {
    let output = bin()
        .args([
            "diamond",
            "--channel-a",
            r#"{"type":"identity","d":2}"#,
            "--channel-b",
            r#"{"type":"depolarizing","p":0.4}"#,
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let diamond = report["diamond"].as_f64().unwrap();
    assert!((diamond - 0.6).abs() < 1e-4, "diamond {diamond}");
    let c1 = report["trace"].as_f64().unwrap();
    assert!(c1 <= diamond + 1e-6 && diamond <= 2.0 * c1 + 1e-6);

    // Identical channels: everything zero.
    let output = bin()
        .args([
            "diamond",
            "--channel-a",
            r#"{"type":"amplitude_damping","p":0.3}"#,
            "--channel-b",
            r#"{"type":"amplitude_damping","p":0.3}"#,
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(report["diamond"].as_f64().unwrap() < 1e-5);
    assert!(report["trace"].as_f64().unwrap() < 1e-10);
    assert!((report["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn diamond_amplitude_damping_within_sandwich() {
    let output = bin()
        .args([
            "diamond",
            "--channel-a",
            r#"{"type":"identity","d":2}"#,
            "--channel-b",
            r#"{"type":"amplitude_damping","p":1.0}"#,
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let diamond = report["diamond"].as_f64().unwrap();
    let c1 = report["trace"].as_f64().unwrap();
    assert!(diamond >= c1 - 1e-6 && diamond <= 2.0 * c1 + 1e-6);
}

#[test]
fn pbt_sweep_rows_satisfy_bound_and_monotonicity() {
    let dir = workdir("pbtsweep");
    let out = dir.join("scaling");
    let output = bin()
        .args(["sweep", "--ports", "2,3,4", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = fs::read_to_string(dir.join("scaling.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n_ports,c_diamond_choi_program,c_diamond_optimized,bound_4_over_n"
    );
    let mut prev = f64::INFINITY;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let at_choi: f64 = cols[1].parse().unwrap();
        let optimized: f64 = cols[2].parse().unwrap();
        let bound: f64 = cols[3].parse().unwrap();
        assert!(optimized <= at_choi + 1e-5, "{line}");
        assert!(optimized <= bound + 1e-6, "{line}");
        assert!(optimized <= prev + 1e-6, "{line}");
        prev = optimized;
    }
}

#[test]
fn invalid_config_produces_error_json() {
    let dir = workdir("err");
    let cfg_path = dir.join("bad.json");
    fs::write(&cfg_path, r#"{"channel": {"type": "depolarizing", "p": 1.7}, "processor": {"type": "teleport", "d": 2}}"#).unwrap();
    let output = bin().args(["optimize", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(!output.status.success());
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"], "invalid_config");
    assert!(err["message"].as_str().unwrap().contains("channel"));

    // Frank-Wolfe on the non-differentiable cost is rejected.
    let cfg = serde_json::json!({
        "channel": {"type": "depolarizing", "p": 0.3},
        "processor": {"type": "teleport", "d": 2},
        "cost": {"kind": "trace"},
        "optimizer": {"method": "fw", "iterations": 10},
    });
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let output = bin().args(["optimize", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(!output.status.success());
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"], "invalid_config");
}
