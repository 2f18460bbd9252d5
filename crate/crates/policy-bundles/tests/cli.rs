//! End-to-end checks of the compiled binary: exit codes, stderr-only
//! logging, and the full pipeline over synthesized inputs.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_policy-bundles"))
}

#[test]
fn synth_then_pipeline_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");

    let output = bin()
        .args(["synth", "--out"])
        .arg(&data)
        .args(["--seed", "11"])
        .output()
        .unwrap();
    assert!(output.status.success(), "synth failed: {output:?}");

    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        format!(
            r#"{{
  "policies": {:?},
  "outcomes": {:?},
  "covariates": {:?},
  "k": 3,
  "k_grid": [2, 8]
}}"#,
            data.join("policies.csv"),
            data.join("outcomes.csv"),
            data.join("covariates.csv")
        ),
    )
    .unwrap();

    let output = bin()
        .args(["pipeline", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "pipeline failed: {output:?}");

    // Data goes to files, logs to stderr, nothing on stdout.
    assert!(output.stdout.is_empty());
    assert!(!output.stderr.is_empty());

    for name in [
        "distance.csv",
        "dendrogram.csv",
        "clusters.csv",
        "elbow.csv",
        "profiles.json",
        "panel.csv",
        "fit_lag1.csv",
        "fit_lag1.json",
        "effects.csv",
        "trajectory.csv",
        "attenuation.csv",
        "brightspots.csv",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "missing output {name}");
    }
}

#[test]
fn missing_input_exits_3_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{
  "policies": "/nonexistent/policies.csv",
  "outcomes": "/nonexistent/outcomes.csv",
  "covariates": "/nonexistent/covariates.csv"
}"#,
    )
    .unwrap();
    let output = bin()
        .args(["cluster", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("/nonexistent/policies.csv"),
        "stderr does not name the missing file: {stderr}"
    );
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{ "start_year": 2016, "end_year": 2006 }"#).unwrap();
    let output = bin()
        .args(["synth", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_command_exits_2() {
    let output = bin().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{ "klusters": 4 }"#).unwrap();
    let output = bin()
        .args(["synth", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("klusters"), "stderr: {stderr}");
}

#[test]
fn bad_flag_value_exits_2() {
    let output = bin()
        .args(["cluster", "--binary-mode", "sideways"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
