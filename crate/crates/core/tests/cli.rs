//! End-to-end tests of the `oamlens` binary: exit codes, report
//! contents, and byte-identical reruns on the shipped example configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oamlens"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn no_subcommand_is_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn missing_required_parameter_is_validation_error() {
    let out = run(&["uca-design", "--freq-ghz", "35"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("eps_r"));
}

#[test]
fn config_mixed_with_flags_is_rejected() {
    let cfg = examples_dir().join("uca.json");
    let out = run(&["uca-design", "--config", cfg.to_str().unwrap(), "--freq-ghz", "35"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("cannot be combined"));
}

#[test]
fn malformed_config_is_validation_error() {
    let dir = std::env::temp_dir();
    let bad = dir.join("oamlens_cli_bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["uca-design", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = std::env::temp_dir();
    let bad = dir.join("oamlens_cli_unknown.json");
    std::fs::write(&bad, r#"{"freq_ghz": 35.0, "eps_r": 2.2, "h_mm": 1.0, "typo": 1}"#).unwrap();
    let out = run(&["uca-design", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("typo"));
}

#[test]
fn short_divergence_table_is_rejected() {
    let dir = std::env::temp_dir();
    let tiny = dir.join("oamlens_cli_tiny.csv");
    std::fs::write(
        &tiny,
        "R_mm,theta1_deg,theta2_deg,theta3_deg,theta4_deg\n8.8,16.4,27.7,38.4,57.0\n9.9,15.2,25.5,35.0,50.0\n",
    )
    .unwrap();
    let out = run(&["fit-divergence", "--table", tiny.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("at least 3"));
}

#[test]
fn uca_design_reports_patch_width() {
    let out = run(&["uca-design", "--freq-ghz", "35", "--eps-r", "2.2", "--solve-h", "--target-eps-re", "2.039"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let w_p = report["W_P_mm"].as_f64().unwrap();
    assert!((w_p - 3.388).abs() / 3.388 < 0.005, "W_P_mm = {w_p}");
    assert!(report["L_P_mm"].as_f64().unwrap() > 0.0);
    assert!(report.get("tool_version").is_some());
}

#[test]
fn fit_divergence_reports_four_modes() {
    let out = run(&["fit-divergence"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let modes = report["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    for m in modes {
        assert!(m["power"]["rms_deg"].as_f64().unwrap() >= 0.0);
        assert!(m["rational"]["rms_deg"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn lens_design_rejects_angle_beyond_coverage() {
    let out = run(&["lens-design", "--freq-ghz", "35", "--eps-r", "2.2", "--focal-mm", "30", "--theta-max-deg", "60"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("exceeds lens angular coverage"));
}

#[test]
fn lens_design_rejects_ambiguous_sizing() {
    let out = run(&[
        "lens-design", "--freq-ghz", "35", "--eps-r", "2.2", "--focal-mm", "30",
        "--theta-max-deg", "20", "--balance-m", "1.67",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("exactly one"));
}

#[test]
fn lens_profile_csv_has_requested_samples() {
    let out = run(&[
        "lens-design", "--freq-ghz", "35", "--eps-r", "2.2", "--focal-mm", "30",
        "--balance-m", "1.67", "--samples", "64", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y_mm,x_mm"));
    assert_eq!(lines.count(), 64);
}

#[test]
fn lens_design_out_writes_json_and_csv() {
    let dir = std::env::temp_dir();
    let base = dir.join("oamlens_cli_lens");
    let _ = std::fs::remove_file(base.with_extension("json"));
    let _ = std::fs::remove_file(base.with_extension("csv"));
    let out = run(&[
        "lens-design", "--freq-ghz", "35", "--eps-r", "2.2", "--focal-mm", "30",
        "--balance-m", "1.67", "--out", base.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    let d = report["diameter_mm"].as_f64().unwrap();
    assert!((d - 50.1).abs() / 50.1 < 0.02, "diameter_mm = {d}");
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    assert!(csv.starts_with("y_mm,x_mm\n"));
}

#[test]
fn bifocal_lens_reports_internal_focal_and_regions() {
    let cfg = examples_dir().join("lens-bifocal.json");
    let out = run(&["lens-design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let bif = &report["bifocal"];
    let f_i = bif["f_i_mm"].as_f64().unwrap();
    assert!((f_i - 65.3).abs() / 65.3 < 0.01, "f_i_mm = {f_i}");
    let rho = bif["rho"].as_f64().unwrap();
    assert!((rho - 2.17).abs() / 2.17 < 0.01, "rho = {rho}");
    assert_eq!(bif["m_int"].as_u64(), Some(27));

    let out_csv = run(&["lens-design", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out_csv.status.code(), Some(0));
    let text = stdout_str(&out_csv);
    assert!(text.starts_with("region,y_mm,x_mm\n"));
    assert!(text.lines().any(|l| l.starts_with("internal,")));
    assert!(text.lines().any(|l| l.starts_with("external,")));
}

#[test]
fn capacity_rejects_invalid_sweep_combination() {
    let out = run(&[
        "capacity", "--scenario", "divergent", "--variable", "focal",
        "--min", "0.02", "--max", "0.06", "--freq-ghz", "35",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_csv_has_one_row_per_step() {
    let out = run(&[
        "capacity", "--scenario", "divergent", "--variable", "distance",
        "--min", "1", "--max", "10", "--steps", "25", "--freq-ghz", "35",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,capacity_bps"));
    assert_eq!(lines.count(), 25);
}

/// Every shipped example config must run cleanly and reproduce its
/// output byte for byte on a second run.
#[test]
fn example_configs_are_deterministic() {
    let cases = [
        ("uca-design", "uca.json"),
        ("fit-divergence", "fit.json"),
        ("lens-design", "lens-single.json"),
        ("lens-design", "lens-bifocal.json"),
        ("capacity", "capacity-divergent.json"),
        ("capacity", "capacity-converged.json"),
        ("capacity", "capacity-bifocal.json"),
    ];
    for (cmd, file) in cases {
        let cfg = examples_dir().join(file);
        let cfg = cfg.to_str().unwrap();
        let first = run(&[cmd, "--config", cfg]);
        assert_eq!(first.status.code(), Some(0), "{file}: {}", stderr_str(&first));
        assert!(!first.stdout.is_empty(), "{file}: empty output");
        let second = run(&[cmd, "--config", cfg]);
        assert_eq!(first.stdout, second.stdout, "{file}: output differs between runs");
    }
}
