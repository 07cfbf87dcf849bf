//! End-to-end tests of the `stabcv` binary: argument handling, output
//! files, exit codes, and byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stabcv_cli::RunRecord;
use stabcv_core::SelectionReport;

fn stabcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabcv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("experiment.conf");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn synth_config(out_dir: &Path) -> String {
    format!(
        "mode = nested\n\
         learner = ridge\n\
         dataset = synth\n\
         n = 30\n\
         p = 4\n\
         tau_true = 2\n\
         rho = 0.2\n\
         nu = 5.0\n\
         n_test = 40\n\
         k = 3\n\
         repeats = 2\n\
         seed = 11\n\
         gamma_grid = 0.1, 1.0, 10.0\n\
         lambda_grid = 0.0, 1.0\n\
         output_dir = {}\n",
        out_dir.display()
    )
}

#[test]
fn run_writes_reports_and_keeps_stdout_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &synth_config(&out));

    let result = stabcv(&["run", "--config", &config]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    // Data goes to files, timing chatter to stderr; stdout stays empty.
    assert!(result.stdout.is_empty());
    for name in ["runs.csv", "runs.json", "report.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }

    let record = RunRecord::from_json(&fs::read_to_string(out.join("runs.json")).unwrap()).unwrap();
    assert_eq!(record.mode, "nested");
    assert_eq!(record.rows.len(), 2);
    assert!(record.rows.iter().all(|r| r.lambda_star.is_some()));

    let report =
        SelectionReport::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.seed, record.rows[0].seed);
}

#[test]
fn command_line_overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let ignored_out = dir.path().join("ignored");
    let out = dir.path().join("actual");
    let config = write_config(dir.path(), &synth_config(&ignored_out));

    let result = stabcv(&[
        "run",
        "--config",
        &config,
        "--mode",
        "kcv",
        "--repeats",
        "1",
        "--seed",
        "99",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(!ignored_out.exists());

    let record = RunRecord::from_json(&fs::read_to_string(out.join("runs.json")).unwrap()).unwrap();
    assert_eq!(record.mode, "kcv");
    assert_eq!(record.base_seed, 99);
    assert_eq!(record.rows.len(), 1);
    assert!(record.rows[0].lambda_star.is_none());
}

#[test]
fn reruns_reproduce_output_files_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    let config = write_config(dir.path(), &synth_config(&out_a));

    assert!(stabcv(&["run", "--config", &config]).status.success());
    assert!(stabcv(&["run", "--config", &config, "--out", out_b.to_str().unwrap()])
        .status
        .success());
    for name in ["runs.csv", "runs.json", "report.json"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(dir.path(), "modee = kcv\n");
    assert_eq!(stabcv(&["run", "--config", &bad_key]).status.code(), Some(2));

    let missing_learner = write_config(
        dir.path(),
        "mode = kcv\ndataset = synth\nn = 20\np = 3\ntau_true = 1\nrho = 0.0\nnu = 1.0\n",
    );
    assert_eq!(stabcv(&["run", "--config", &missing_learner]).status.code(), Some(2));

    let missing_file = dir.path().join("absent.conf");
    assert_eq!(
        stabcv(&["run", "--config", missing_file.to_str().unwrap()]).status.code(),
        Some(2)
    );

    // Invalid override on top of a valid config.
    let out = dir.path().join("out");
    let good = write_config(dir.path(), &synth_config(&out));
    assert_eq!(stabcv(&["run", "--config", &good, "--k", "1"]).status.code(), Some(2));
    assert_eq!(
        stabcv(&["run", "--config", &good, "--lambda-grid", "abc"]).status.code(),
        Some(2)
    );
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mode = kcv\nlearner = ridge\ndataset = does-not-exist.csv\n",
    );
    let result = stabcv(&["run", "--config", &config]);
    assert_eq!(result.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&result.stderr).contains("does-not-exist.csv"));
}

#[test]
fn bound_subcommand_reads_a_report_and_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &synth_config(&out));
    assert!(stabcv(&["run", "--config", &config, "--mode", "kcv"]).status.success());
    let report_path = out.join("report.json");

    // Heuristic M: falls back to the report's largest observed loss.
    let result = stabcv(&["bound", report_path.to_str().unwrap(), "--delta", "0.2"]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let value: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(value["schema"], "stabcv-bound/1");
    assert_eq!(value["m_bound_source"], "observed");
    assert_eq!(value["delta"], 0.2);
    let bound = value["bound"].as_f64().unwrap();
    let cv_error = value["cv_error"].as_f64().unwrap();
    assert!(bound >= cv_error);
    assert!(value["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w.as_str().unwrap().contains("largest observed loss")));

    // Certified M: no fallback warning, source flips to "given".
    let certified = stabcv(&["bound", report_path.to_str().unwrap(), "--M", "2.5"]);
    assert!(certified.status.success());
    let value: serde_json::Value = serde_json::from_slice(&certified.stdout).unwrap();
    assert_eq!(value["m_bound_source"], "given");
    assert_eq!(value["m_bound"], 2.5);
}

#[test]
fn bound_subcommand_rejects_missing_or_bad_reports() {
    let dir = tempfile::tempdir().unwrap();
    let absent = dir.path().join("absent.json");
    assert_eq!(stabcv(&["bound", absent.to_str().unwrap()]).status.code(), Some(3));

    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"schema\": \"stabcv-report/9\"}").unwrap();
    assert_eq!(stabcv(&["bound", junk.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn heatmap_subcommand_writes_four_surface_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("maps");
    let result = stabcv(&[
        "heatmap",
        "--n",
        "12",
        "--p",
        "3",
        "--tau-true",
        "2",
        "--rho",
        "0.1",
        "--nu",
        "2.0",
        "--cv",
        "fivefold",
        "--seed",
        "3",
        "--n-test",
        "25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(result.stdout.is_empty());
    for name in [
        "heatmap_cv_fivefold.csv",
        "heatmap_test_fivefold.csv",
        "heatmap_cv_fivefold.svg",
        "heatmap_test_fivefold.svg",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let csv_text = fs::read_to_string(out.join("heatmap_cv_fivefold.csv")).unwrap();
    let header = csv_text.lines().next().unwrap();
    assert!(header.starts_with("tau,"));
    assert_eq!(header.split(',').count(), 21); // tau column + 20 gammas
    assert_eq!(csv_text.lines().count(), 4); // header + taus 1..=3
}

#[test]
fn heatmap_mode_in_a_config_also_writes_surfaces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(
        dir.path(),
        &format!(
            "mode = heatmap\ndataset = synth\nn = 10\np = 3\ntau_true = 2\nrho = 0.0\n\
             nu = 2.0\nn_test = 20\ncv = loocv\nseed = 2\noutput_dir = {}\n",
            out.display()
        ),
    );
    assert!(stabcv(&["run", "--config", &config]).status.success());
    assert!(out.join("heatmap_cv_loocv.csv").exists());
    assert!(out.join("heatmap_test_loocv.svg").exists());
}
