//! End-to-end runs of the compiled binary: exit statuses, CSV and
//! histogram outputs, overrides, and determinism across worker counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn afrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afrelay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn count_trials_prints_one_count_per_relay_deployment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 4, "nd": 4, "nr": 2, "k_list": [8, 10]}"#,
    );
    let output = afrelay(&["count-trials", "--config", config.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert_eq!(stdout_of(&output), "386560\n9757184\n");
}

#[test]
fn missing_config_file_exits_with_the_config_status() {
    let output = afrelay(&[
        "mse-vs-k",
        "--config",
        "/nonexistent/config.json",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("/nonexistent/config.json"));
}

#[test]
fn unknown_config_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"ns": 2, "nd": 2, "nr": 2, "k_list": [4]}"#);
    let out_path = dir.path().join("out.csv");
    let output = afrelay(&[
        "mse-vs-k",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--set",
        "bogus=1",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("bogus"), "{}", stderr_of(&output));
}

#[test]
fn unknown_subcommands_exit_with_the_usage_status() {
    let output = afrelay(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_scheme_labels_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k_list": [4], "schemes": ["gmm", "telepathy"]}"#,
    );
    let out_path = dir.path().join("out.csv");
    let output = afrelay(&[
        "mse-vs-k",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr_of(&output).contains("telepathy"),
        "{}",
        stderr_of(&output)
    );
}

#[test]
fn an_undersized_budget_exits_with_the_budget_status() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k_list": [4], "schemes": ["exhaustive"],
            "trials": 2, "exhaustive_budget": 10}"#,
    );
    let out_path = dir.path().join("out.csv");
    let output = afrelay(&[
        "mse-vs-k",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(!out_path.exists(), "refused runs must not write output");
}

#[test]
fn mse_sweep_writes_one_row_per_point_and_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k_list": [2, 4], "trials": 5, "seed": 3}"#,
    );
    let out_path = dir.path().join("out.csv");
    let output = afrelay(&[
        "mse-vs-k",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "sweep,scheme,mean_mse,mse_ci95,mean_ber,ber_ci95,mean_L,seconds"
    );
    assert_eq!(lines.len(), 1 + 2 * 3);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8, "row: {line}");
        assert!(fields[0] == "k=2" || fields[0] == "k=4");
        let mse: f64 = fields[2].parse().unwrap();
        assert_eq!(format!("{mse:.8e}"), fields[2], "nine digits round-trip");
        assert!(fields[4].is_empty() && fields[5].is_empty(), "no BER fields");
        assert!(fields[7].is_empty(), "seconds column stays empty");
    }

    let table = stdout_of(&output);
    assert!(table.contains("sweep"));
    assert!(table.contains("k=2") && table.contains("k=4"));
    assert!(stderr_of(&output).contains("[1/2]"), "progress on stderr");
}

#[test]
fn ber_sweep_fills_the_detection_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k": 4, "snr_db_list": [0, 10],
            "trials": 5, "symbols_per_trial": 10, "seed": 3}"#,
    );
    let out_path = dir.path().join("out.csv");
    let output = afrelay(&[
        "ber-vs-snr",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let text = std::fs::read_to_string(&out_path).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(fields[0].starts_with("snr_db="));
        let ber: f64 = fields[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&ber));
        assert!(!fields[5].is_empty());
    }
}

#[test]
fn histogram_runs_write_the_companion_distribution_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k": 4, "snr_db_list": [5], "trials": 8, "seed": 3}"#,
    );
    let out_path = dir.path().join("hist_run.csv");
    let output = afrelay(&[
        "histogram",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let summary = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 2, "histogram runs use a single scheme");
    assert!(rows[1].starts_with("snr_db=5,gmm,"));

    let hist_path = dir.path().join("hist_run.csv.hist.csv");
    let hist = std::fs::read_to_string(&hist_path).unwrap();
    let lines: Vec<&str> = hist.lines().collect();
    assert_eq!(lines[0], "sweep,L,count");
    let total: u64 = lines[1..]
        .iter()
        .map(|line| line.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 8);
}

#[test]
fn worker_count_leaves_the_csv_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k": 4, "snr_db_list": [0, 10],
            "trials": 20, "symbols_per_trial": 10, "seed": 5}"#,
    );
    let single = dir.path().join("single.csv");
    let pooled = dir.path().join("pooled.csv");
    for (out, workers) in [(&single, "1"), (&pooled, "2")] {
        let output = afrelay(&[
            "ber-vs-snr",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    assert_eq!(
        std::fs::read(&single).unwrap(),
        std::fs::read(&pooled).unwrap()
    );
}

#[test]
fn the_seed_flag_overrides_the_configured_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"ns": 2, "nd": 2, "nr": 2, "k_list": [4], "trials": 5, "seed": 3}"#,
    );
    let baseline = dir.path().join("baseline.csv");
    let reseeded = dir.path().join("reseeded.csv");
    for (out, extra) in [(&baseline, None), (&reseeded, Some(["--seed", "4"]))] {
        let mut args = vec![
            "mse-vs-k",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        if let Some(flags) = extra {
            args.extend(flags);
        }
        let output = afrelay(&args);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    assert_ne!(
        std::fs::read(&baseline).unwrap(),
        std::fs::read(&reseeded).unwrap()
    );
}

#[test]
fn validate_reports_every_suite_and_exits_cleanly() {
    let output = afrelay(&["validate", "--seed", "7"]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let report = stdout_of(&output);
    assert_eq!(report.lines().count(), 3);
}
