//! End-to-end tests of the `dissiprop` binary: JSON contracts, exit codes,
//! artifact determinism and config-file precedence.

use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dissiprop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

#[test]
fn action_reports_closed_form_and_quadrature_agreement() {
    let output = run(&[
        "action", "--kappa", "1", "--q0", "0", "--t0", "0", "--q1", "1", "--t1", "1",
    ]);
    assert!(output.status.success());
    let json = stdout_json(&output);
    let closed = json["closed_form"].as_f64().unwrap();
    assert!((closed - 0.040988353434663212).abs() < 1e-12);
    assert!(json["difference"].as_f64().unwrap() < 1e-8);
    assert!((json["form"]["beta"].as_f64().unwrap() + 1.0819767068693264).abs() < 1e-12);
}

#[test]
fn cktest_flags_markovian_and_non_markovian_kernels() {
    let free = stdout_json(&run(&["cktest", "--kappa", "0"]));
    assert_eq!(free["status"], "markovian");
    assert!(free["residual"].as_f64().unwrap() < 1e-12);

    let damped = stdout_json(&run(&["cktest", "--kappa", "1"]));
    assert_eq!(damped["status"], "non_markovian");
    assert!((damped["residual"].as_f64().unwrap() - 1.0324518004933561).abs() < 1e-9);
}

#[test]
fn propagator_csv_is_deterministic_and_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.csv");
    let path_b = dir.path().join("b.csv");
    for path in [&path_a, &path_b] {
        let output = run(&[
            "propagator",
            "--kappa",
            "0.7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    let a = std::fs::read(&path_a).unwrap();
    let b = std::fs::read(&path_b).unwrap();
    assert_eq!(a, b, "reruns must be byte-identical");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# config "));
    assert!(text.lines().nth(1) == Some("q0,q1,re,im"));
    assert_eq!(text.lines().count(), 2 + 41 * 41);
}

#[test]
fn invalid_parameters_produce_json_error_and_exit_2() {
    let output = run(&["action", "--t1", "-1"]);
    assert_eq!(output.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&output.stderr).expect("stderr is JSON");
    assert_eq!(err["code"], 2);
    assert!(err["message"].as_str().unwrap().contains("t1"));
}

#[test]
fn unknown_flags_produce_json_error_and_exit_2() {
    let output = run(&["action", "--bogus", "1"]);
    assert_eq!(output.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&output.stderr).expect("stderr is JSON");
    assert_eq!(err["code"], 2);
}

#[test]
fn aliasing_failure_exits_3() {
    // a deliberately coarse wave grid cannot resolve the kernel chirp
    let output = run(&[
        "evolve", "--qcount", "201", "--qmin", "-18", "--qmax", "18", "--t1", "0.05",
    ]);
    assert_eq!(output.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&output.stderr).expect("stderr is JSON");
    assert_eq!(err["code"], 3);
    assert!(err["message"].as_str().unwrap().contains("aliasing"));
}

#[test]
fn surface_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    let generated = stdout_json(&run(&[
        "surface",
        "--cells",
        "32",
        "--out",
        path.to_str().unwrap(),
    ]));
    let reloaded = stdout_json(&run(&["surface", "--input", path.to_str().unwrap()]));
    for key in [
        "stokes_residual_free",
        "stokes_residual_harmonic",
        "closedness_defect_damped",
    ] {
        let a = generated[key].as_f64().unwrap();
        let b = reloaded[key].as_f64().unwrap();
        assert!(
            (a - b).abs() < 1e-12,
            "{key} changed across round trip: {a} vs {b}"
        );
    }
    assert!((generated["closedness_defect_damped"].as_f64().unwrap() + 1.0).abs() < 1e-9);
}

#[test]
fn evolve_reports_conserved_norm_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let wave = dir.path().join("wave.csv");
    let report = dir.path().join("report.csv");
    let output = run(&[
        "evolve",
        "--kappa",
        "0.5",
        "--out",
        wave.to_str().unwrap(),
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let json = stdout_json(&output);
    let steps = json["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    for row in steps {
        assert!((row["norm"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }
    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.lines().nth(1) == Some("step,t,norm,center,width"));
    let wave_text = std::fs::read_to_string(&wave).unwrap();
    assert!(wave_text.lines().nth(1) == Some("q,re,im,abs2"));
}

#[test]
fn lattice_emits_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lattice.csv");
    let json = stdout_json(&run(&["lattice", "--out", path.to_str().unwrap()]));
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let ratio = rows[2]["ratio"].as_f64().unwrap();
    assert!((3.8..4.2).contains(&ratio));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().nth(1) == Some("N,S_N,abs_err,ratio"));
    assert_eq!(text.lines().count(), 2 + 3);
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"kappa": 0.5, "q1": 2.0}"#).unwrap();
    let json = stdout_json(&run(&[
        "--config",
        path.to_str().unwrap(),
        "action",
        "--kappa",
        "1.25",
    ]));
    assert_eq!(json["config"]["kappa"].as_f64().unwrap(), 1.25);
    assert_eq!(json["config"]["q1"].as_f64().unwrap(), 2.0);
}

#[test]
fn verify_passes_and_emits_criterion_lines() {
    let output = run(&["verify"]);
    assert!(output.status.success(), "verify must exit 0 on a clean build");
    let json = stdout_json(&output);
    assert_eq!(json["all_passed"], true);
    assert_eq!(json["criteria"].as_array().unwrap().len(), 11);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains("[PASS]")).count(), 11);
}
