use std::path::{Path, PathBuf};
use std::process::Command;

use rdsim_cli::config::{ExperimentConfig, Format};
use rdsim_cli::report::deterministic_part;
use rdsim_cli::{report_exit_code, run, Check, Report};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&repo_root().join("configs").join(name), None).unwrap()
}

fn rdsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rdsim")).args(args).output().unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Compares against `tests/golden/<stem>.<ext>`; `RDSIM_UPDATE_GOLDEN=1`
/// rewrites the file instead.
fn assert_golden(stem: &str, ext: &str, rendered: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{stem}.{ext}"));
    let got = deterministic_part(rendered);
    if std::env::var_os("RDSIM_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(got == want, "{stem}.{ext} differs from the golden file");
}

#[test]
fn reports_match_golden_files() {
    for stem in ["pendulum", "spinchain", "born"] {
        let report = run(&config(&format!("{stem}.json")), 2).unwrap();
        assert!(report.pass, "{stem}");
        assert_golden(stem, "json", &report.render(Format::Json).unwrap());
        assert_golden(stem, "csv", &report.render(Format::Csv).unwrap());
    }
}

#[test]
fn echoed_inputs_rerun_to_the_same_results() {
    for stem in ["pendulum", "spinchain", "born"] {
        let first = run(&config(&format!("{stem}.json")), 1).unwrap();
        let echoed = ExperimentConfig::from_json(&first.inputs.to_string()).unwrap();
        let second = run(&echoed, 3).unwrap();
        assert_eq!(first.inputs, second.inputs, "{stem}");
        assert_eq!(first.results, second.results, "{stem}");
        assert_eq!(first.checks, second.checks, "{stem}");
    }
}

#[test]
fn pendulum_interval_contains_one_half() {
    let report = run(&config("pendulum.json"), 2).unwrap();
    let r = &report.results;
    let (lo, hi) = (r["interval_r"][0].as_f64().unwrap(), r["interval_r"][1].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= hi, "[{lo}, {hi}]");
    assert_eq!(r["counts"]["n_trials"], 100_000);
    // CLT: the estimate sits within 5σ of 1/2
    let p_hat = r["p_hat_r"].as_f64().unwrap();
    assert!((p_hat - 0.5).abs() <= 5.0 * (0.25f64 / 1e5).sqrt());
}

#[test]
fn spinchain_four_sites_commutes_and_scans() {
    let report = run(&config("spinchain.json"), 1).unwrap();
    let c = &report.results["commutators"];
    assert!(c["spin_flip"].as_f64().unwrap() < 1e-10);
    assert!(c["su2_max"].as_f64().unwrap() < 1e-10);
    let scan = report.results["sensitivity"].as_array().unwrap();
    assert_eq!(scan.len(), 7);
    assert!(scan.iter().any(|p| p["h"] == 0.0 && p["order_parameter"].is_null()));
}

#[test]
fn negative_trial_count_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(
        &dir,
        "bad.json",
        r#"{"kind": "pendulum", "seed": 1, "parameters": {"delta": 0.0,
            "noise": {"kind": "gaussian", "mu": 0.0, "sigma": 1.0}, "n_trials": -5}}"#,
    );
    let out = rdsim(&["pendulum", "--config", &path]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("parameters.n_trials"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn validation_errors_name_the_field() {
    let cases = [
        (r#"{"kind": "spinchain", "seed": 1, "parameters": {"n_sites": 4, "sign": -1, "boundary": "open", "colour": 1}}"#, "colour"),
        (r#"{"kind": "spinchain", "seed": 1, "parameters": {"n_sites": 4, "sign": 2, "boundary": "open"}}"#, "parameters.sign"),
        (r#"{"kind": "spinchain", "parameters": {"n_sites": 4, "sign": 1, "boundary": "open"}}"#, "seed"),
        (r#"{"kind": "spinchain", "seed": 1, "parameters": {"n_sites": 4, "sign": 1, "boundary": "open"}, "extra": 0}"#, "extra"),
        (r#"{"kind": "born", "seed": 1, "parameters": {"n_labels": 2, "states": [[[1.0, 0.0], [1.0, 0.0]]]}}"#, "parameters.states[0]"),
        (r#"{"kind": "born", "seed": 1, "parameters": {"n_labels": 3, "ens_size": 10}}"#, "parameters.ens_size"),
        (r#"{"kind": "pendulum", "seed": 1, "parameters": {"delta": 0.0, "n_trials": 10,
            "noise": {"kind": "uniform", "a": 1.0, "b": 0.0}}}"#, "parameters.noise"),
        (r#"{"kind": "pendulum", "seed": 1, "parameters": {"delta": 0.0, "n_trials": 0,
            "noise": {"kind": "uniform", "a": 0.0, "b": 1.0}}}"#, "parameters.n_trials"),
    ];
    for (text, field) in cases {
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains(field), "{field}: {err}");
    }
}

#[test]
fn subcommand_must_match_kind() {
    let path = repo_root().join("configs/spinchain.json");
    let out = rdsim(&["born", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));
}

#[test]
fn seed_flag_overrides_the_file_and_csv_follows_the_extension() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let cfg = repo_root().join("configs/spinchain.json");
    let out = rdsim(&[
        "spinchain",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("section,path,value\r\n"));
    assert!(csv.contains("inputs,seed,9\r\n"));
}

#[test]
fn failed_checks_map_to_exit_three() {
    let report = Report::new(
        "pendulum",
        serde_json::json!({}),
        serde_json::json!({}),
        vec![Check::at_most("ok", 0.0, 1.0, ""), Check::at_most("too_big", 2.0, 1.0, "")],
        std::time::Instant::now(),
    );
    assert!(!report.pass);
    assert_eq!(report_exit_code(&report), 3);
    assert_eq!(report.failed_checks().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["too_big"]);
}
