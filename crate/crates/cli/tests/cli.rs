//! End-to-end behaviour of the `fracrel` binary: exit codes, determinism and
//! artifact layout.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracrel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracrel")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn constants_at_one_half_reproduce_the_closed_forms() {
    let out = fracrel(&["constants", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = report(&out);
    assert_eq!(doc["command"], "constants");
    assert_eq!(doc["config"]["operator"]["s"], 0.5);
    assert!((doc["report"]["constants"]["k_s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    for row in doc["report"]["residuals"].as_array().unwrap() {
        assert!(row["measured"].as_f64().unwrap() < 1e-10, "{row}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let a = fracrel(&["groundstate", "--n", "128", "--L", "32", "--seed", "3", "--out", out]);
    let field_a = std::fs::read(dir.path().join("groundstate.frlf")).unwrap();
    let b = fracrel(&["groundstate", "--n", "128", "--L", "32", "--seed", "3", "--out", out]);
    let field_b = std::fs::read(dir.path().join("groundstate.frlf")).unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(field_a, field_b);
}

#[test]
fn groundstate_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracrel(&["--plot-data", "groundstate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["groundstate.frlf", "groundstate.json", "groundstate_trace.csv", "groundstate_field.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let trace = std::fs::read_to_string(dir.path().join("groundstate_trace.csv")).unwrap();
    assert!(trace.starts_with("iter,energy,manifold_defect,nehari_defect,grad_norm"));
    let tidy = std::fs::read_to_string(dir.path().join("groundstate_field.csv")).unwrap();
    assert!(tidy.starts_with("x0,value"));
    let doc = report(&out);
    assert_eq!(doc["report"]["converged"], true);
    assert!(doc["report"]["energy"].as_f64().unwrap() > 0.0);
}

#[test]
fn field_commands_read_groundstate_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    fracrel(&["groundstate", "--L", "32", "--out", out]);
    let field = dir.path().join("groundstate.frlf");
    let field = field.to_str().unwrap();

    let p = fracrel(&["pohozaev", "--field", field, "--L", "32"]);
    assert_eq!(p.status.code(), Some(0));
    assert!(report(&p)["report"]["pohozaev"]["relative_residual"].as_f64().unwrap().abs() < 1e-3);

    let s = fracrel(&["symmetry", "--field", field, "--lambda", "-2", "--out", out]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let doc = report(&s);
    assert!(doc["report"]["reflection"]["relative_residual"].as_f64().unwrap() < 5e-3);
    assert!(Path::new(out).join("symmetry_shells.csv").exists());

    let target = dir.path().join("applied.csv");
    let a = fracrel(&["apply", "--field", field, "--sigma", "0.5", "--output", target.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert!(target.exists());
}

#[test]
fn subcritical_coupling_exits_2_naming_f2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracrel(&["groundstate", "--c", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:") && err.contains("(f2)"), "{err}");
}

#[test]
fn bad_configuration_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[grid]\nn = 100\n").unwrap();
    let out = fracrel(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n"));

    let out = fracrel(&["constants", "--s", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("operator.s"));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[operator]\ns = 0.25\nm = 2.0\n").unwrap();
    let out = fracrel(&["constants", "--config", cfg.to_str().unwrap(), "--s", "0.75"]);
    let doc = report(&out);
    assert_eq!(doc["config"]["operator"]["s"], 0.75);
    assert_eq!(doc["config"]["operator"]["m"], 2.0);
}

#[test]
fn non_convergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[solver]\nmax_iter = 2\n").unwrap();
    let out = fracrel(&["groundstate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(report(&out)["report"]["converged"], false);
}

#[test]
fn verify_all_negative_control() {
    assert_eq!(fracrel(&["verify-all"]).status.code(), Some(0));
    let tight = fracrel(&["verify-all", "--tighten", "1000"]);
    assert_eq!(tight.status.code(), Some(3));
    assert_eq!(report(&tight)["report"]["all_passed"], false);
}

#[test]
fn nonexistence_is_certified_at_and_above_the_critical_power() {
    let out = fracrel(&["nonexist", "--N", "3", "--n", "16", "--L", "12", "--p", "3,4", "--fields", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = report(&out)["report"]["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["certified"] == true && r["gap"].as_f64().unwrap() > 0.0));
}

#[test]
fn fixpoint_and_sobolev_scan_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let f = fracrel(&["fixpoint", "--out", out]);
    assert_eq!(f.status.code(), Some(0));
    assert_eq!(report(&f)["report"]["converged"], true);
    let s = fracrel(&[
        "sobolev-scan",
        "--N",
        "3",
        "--n",
        "32",
        "--L",
        "8",
        "--t-min",
        "2",
        "--t-max",
        "8",
        "--steps",
        "3",
        "--out",
        out,
    ]);
    assert_eq!(s.status.code(), Some(0));
    assert!(dir.path().join("sobolev_scan.csv").exists());
}
