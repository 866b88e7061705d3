//! End-to-end tests of the command-line interface: exit codes, report
//! artifacts, and determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsv"))
}

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rsv-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn level1_pipeline_writes_report_and_dumps() {
    let out = tmp_dir("level1");
    let status = bin()
        .args(["level1", "--problem"])
        .arg(problem("d1_tau05.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "level1");
    let psi2 = report["solutions"][0]["laplace"]["phi_values"][0][0]
        .as_f64()
        .unwrap();
    assert!((psi2 - 0.169620).abs() <= 1e-4, "Psi(2) = {psi2}");
    assert!(out.join("psi_alpha0.csv").exists());
    assert!(out.join("Psi_alpha0.csv").exists());
}

#[test]
fn reports_are_deterministic() {
    let out_a = tmp_dir("det-a");
    let out_b = tmp_dir("det-b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["solve", "--problem"])
            .arg(problem("d1_tau05_r025.json"))
            .arg("--out")
            .arg(out)
            .args(["--seed", "7"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out_a.join("report.json")).unwrap();
    let b = std::fs::read(out_b.join("report.json")).unwrap();
    assert_eq!(a, b, "reports differ between identical runs");
}

#[test]
fn double_root_fails_validation_with_exit_1() {
    let out = tmp_dir("double");
    let file = out.join("double.json");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(&file, r#"{"P": [1.0, 2.0, 1.0], "Q": [1.0, 1.0], "R": []}"#).unwrap();
    for cmd in ["validate", "level1", "verify-all"] {
        let output = bin()
            .args([cmd, "--problem"])
            .arg(&file)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(1), "{cmd} exit code");
        let text = format!(
            "{}{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        assert!(text.contains("DoubleRoot"), "{cmd}: {text}");
    }
}

#[test]
fn missing_problem_file_is_a_config_error() {
    let out = tmp_dir("missing");
    let status = bin()
        .args(["level1", "--problem", "/nonexistent/problem.json"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn verify_all_passes_with_na_smoothing_for_empty_series() {
    let out = tmp_dir("verify");
    let output = bin()
        .args(["verify-all", "--problem"])
        .arg(problem("d1_tau05.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(output.status.code(), Some(0), "stdout: {stdout}");
    assert!(stdout.contains("smoothing-order"));
    assert!(stdout.lines().any(|l| l.contains("smoothing-order") && l.contains("n/a")));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn proto_command_emits_csv_and_header() {
    let out = tmp_dir("proto");
    let status = bin()
        .args(["proto", "--problem"])
        .arg(problem("d1_tau05.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let header: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("f0_alpha0.json")).unwrap())
            .unwrap();
    assert!((header["tau"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let csv = std::fs::read_to_string(out.join("f0_alpha0.csv")).unwrap();
    assert!(csv.contains("t,g_re,g_im,sigma"));
}

#[test]
fn z_override_is_honored() {
    let out = tmp_dir("zover");
    let status = bin()
        .args(["laplace", "--problem"])
        .arg(problem("d1_tau05.json"))
        .arg("--out")
        .arg(&out)
        .args(["--z", "3,0"])
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let z = &report["solutions"][0]["laplace"]["z_samples"][0];
    assert_eq!(z[0].as_f64().unwrap(), 3.0);
}
