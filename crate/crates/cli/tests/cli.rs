//! End-to-end tests of the `tjump` binary: determinism of file outputs,
//! JSON values of the analytic subcommands, config-file handling, and exit
//! codes.

use std::path::Path;
use std::process::{Command, Output};

use thermal_jumps::csvio;

fn tjump(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tjump"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn mode_run_is_deterministic_and_parses_back() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = tjump(&[
            "mode", "--a", "1", "--nbar", "1", "--kappa", "0.1", "--detuning", "0", "--tmax",
            "500", "--dt-out", "0.5", "--seed", "7", "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let series_a = read(dir_a.path(), "series.csv");
    assert_eq!(series_a, read(dir_b.path(), "series.csv"));
    let events_a = read(dir_a.path(), "events.csv");
    assert_eq!(events_a, read(dir_b.path(), "events.csv"));

    let series = csvio::mode_series_from_csv(&series_a).unwrap();
    assert_eq!(series[0].t, 0.0);
    assert_eq!(series.len(), 1001);
    let events = csvio::mode_events_from_csv(&events_a).unwrap();
    assert!(!events.is_empty());
    // and a different seed changes the output
    let dir_c = tempfile::tempdir().unwrap();
    let out = tjump(&[
        "mode", "--a", "1", "--nbar", "1", "--kappa", "0.1", "--tmax", "500", "--dt-out", "0.5",
        "--seed", "8", "--out", dir_c.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(series_a, read(dir_c.path(), "series.csv"));
}

#[test]
fn einstein_and_driven_write_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = tjump(&[
        "einstein", "--a", "1", "--nbar", "1", "--tmax", "200", "--seed", "3", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let events = csvio::events_from_csv(&read(dir.path(), "events.csv")).unwrap();
    assert!(events.len() > 100);

    let dir = tempfile::tempdir().unwrap();
    let out = tjump(&[
        "driven", "--a", "1", "--nbar", "0.25", "--drive", "1.5", "--tmax", "100", "--dt-out",
        "0.25", "--seed", "4", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let series = csvio::driven_series_from_csv(&read(dir.path(), "series.csv")).unwrap();
    assert_eq!(series.len(), 401);
    assert!(series.iter().all(|p| (0.0..=1.0).contains(&p.pe)));
}

#[test]
fn rates_json_matches_analytic_value() {
    let out = tjump(&[
        "rates", "--a", "1", "--nbar", "1", "--kappa", "0.01", "--detuning", "0", "--n", "1",
    ]);
    let json = stdout_json(&out);
    let gamma_up = json["gamma_up"].as_f64().unwrap();
    assert!((gamma_up - 8.0e-4 / 9.0).abs() < 1e-18, "gamma_up {gamma_up}");
    assert_eq!(json["gamma_down"].as_f64().unwrap(), gamma_up);
    assert!((json["p_excited_eq"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn consistency_json_meets_tolerance() {
    let out = tjump(&["consistency", "--a", "1", "--nbar", "1", "--window", "200", "--nodes", "4096"]);
    let json = stdout_json(&out);
    assert!(json["rel_err_up"].as_f64().unwrap() < 1e-6);
    assert!(json["rel_err_down"].as_f64().unwrap() < 1e-6);
    let sum_up = json["sum_up"].as_f64().unwrap();
    assert!((sum_up - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn ensemble_prints_summary_json() {
    let out = tjump(&[
        "ensemble", "--model", "mode", "--a", "1", "--nbar", "1", "--kappa", "0.1", "--tmax",
        "200", "--dt-out", "1", "--traj", "3", "--seed", "11",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["seed"].as_u64().unwrap(), 11);
    assert_eq!(json["total_time"].as_f64().unwrap(), 600.0);
    assert!(json["tv_distance"].as_f64().is_some());
    assert!(json["histogram"].is_object());
    assert!(json["gamma_up_analytic"].as_f64().unwrap() > 0.0);
    assert!(json["gamma_up_rel_dev"].as_f64().is_some());
    assert_eq!(json["config_echo"]["model"], "mode");
    // rerun gives byte-identical stdout
    let again = tjump(&[
        "ensemble", "--model", "mode", "--a", "1", "--nbar", "1", "--kappa", "0.1", "--tmax",
        "200", "--dt-out", "1", "--traj", "3", "--seed", "11",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.conf");
    std::fs::write(&config_path, "a = 1.0\nnbar = 0.25\nkappa = 0.02 # file value\nn = 1\n")
        .unwrap();
    // flag overrides the file's nbar; kappa and n come from the file
    let out = tjump(&[
        "rates", "--config", config_path.to_str().unwrap(), "--nbar", "1.0",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["nbar"].as_f64().unwrap(), 1.0);
    assert_eq!(json["kappa"].as_f64().unwrap(), 0.02);
    assert_eq!(json["n"].as_u64().unwrap(), 1);
}

#[test]
fn usage_errors_exit_with_code_2() {
    // unknown flag
    let out = tjump(&["mode", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(2));

    // unknown config key
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.conf");
    std::fs::write(&config_path, "unknown_key = 3\n").unwrap();
    let out = tjump(&["mode", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // model conflicting with the subcommand
    std::fs::write(&config_path, "model = einstein\n").unwrap();
    let out = tjump(&["mode", "--config", config_path.to_str().unwrap(), "--tmax", "10"]);
    assert_eq!(out.status.code(), Some(2));

    // out-of-range parameter
    let out = tjump(&["einstein", "--a", "-1", "--tmax", "10"]);
    assert_eq!(out.status.code(), Some(2));

    // ensemble without a model
    let out = tjump(&["ensemble", "--tmax", "10"]);
    assert_eq!(out.status.code(), Some(2));

    // budget guard refuses to start
    let out = tjump(&["einstein", "--tmax", "1e9", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    // missing subcommand
    let out = tjump(&[]);
    assert_eq!(out.status.code(), Some(2));
}
