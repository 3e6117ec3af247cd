use std::process::Command;

use jchsim::driver::run_cli_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["jchsim"];
    full.extend_from_slice(args);
    let code = run_cli_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn value(text: &str, name: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(name)).unwrap_or_else(|| panic!("no `{name}` in {text}"));
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

#[test]
fn dimer_analytic_prints_asymptotes() {
    let (code, out, _) = run(&["dimer-analytic", "--delta-over-g", "1000", "--g", "0.01", "--j", "0.0001"]);
    assert_eq!(code, 0);
    assert!((value(&out, "Var") - 0.5946).abs() < 5e-3);
    assert!((value(&out, "E") - 0.4616).abs() < 5e-3);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_jchsim");
    let ok = Command::new(bin).args(["dimer-analytic", "--delta-over-g", "3"]).output().unwrap();
    assert!(ok.status.success());
    let bad = Command::new(bin).args(["sweep", "--points", "1"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("sweep.points"));
    let unknown = Command::new(bin).arg("frobnicate").output().unwrap();
    assert!(!unknown.status.success());
}

#[test]
fn sweep_outputs_and_detect() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let json = dir.path().join("sweep.json");
    let log = dir.path().join("sweep.log");
    let (code, _, err) = run(&[
        "sweep", "--lattice", "trimer", "--mode", "closed", "--min", "1", "--max", "10", "--points", "41", "--samples", "600",
        "--csv", csv.to_str().unwrap(), "--json", json.to_str().unwrap(), "--log", log.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("delta_over_g,var_dimer_analytic,c_ij,c_ik,ratio_ij,ratio_ik,"));
    assert_eq!(body.lines().count(), 42);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["resonances", "anti_resonances", "parameters", "versions"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert_eq!(summary["parameters"]["lattice"]["shape"], "trimer");
    assert!(std::fs::read_to_string(&log).unwrap().contains("41 points"));

    let (code, out, _) = run(&["detect", "--input", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(report["resonances"].as_array().unwrap().len() >= 2);
    assert!(report["anti_resonances"].is_array());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[physics]\ndelta_over_g = 1000.0\n[quench]\nj_final = 1e-4\n").unwrap();
    let (code, out, _) = run(&["dimer-analytic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((value(&out, "Var") - 0.5946).abs() < 5e-3);
    let (_, out2, _) = run(&["dimer-analytic", "--config", cfg.to_str().unwrap(), "--delta-over-g", "2"]);
    assert!((value(&out2, "Var") - value(&out, "Var")).abs() > 1e-2);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sweep]\npointz = 10\n").unwrap();
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_ne!(code, 0);
    assert!(err.contains("sweep.pointz"), "{err}");
    let (code, _, err) = run(&["sweep", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_ne!(code, 0);
    assert!(err.contains("missing.toml"));
}

#[test]
fn unwritable_output_fails_before_work() {
    let (code, _, err) = run(&["sweep", "--points", "200", "--csv", "/nonexistent-dir/out.csv"]);
    assert_ne!(code, 0);
    assert!(err.contains("/nonexistent-dir/out.csv"), "{err}");
}

#[test]
fn quench_trajectory_and_init_protocol() {
    let (code, out, err) = run(&["quench", "--lattice", "dimer", "--delta-over-g", "5", "--samples", "50"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("time,n_i,var_i,entropy_i,n_j"));
    assert!(header.contains("p_psi0") && header.contains("c_ij"));
    assert_eq!(lines.count(), 50);

    let (code, out, err) = run(&["init-protocol", "--g-a", "50"]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(report["fidelity"].as_f64().unwrap() > 0.95);
    let (code, _, err) = run(&["init-protocol", "--fidelity-floor", "0.9999999"]);
    assert_ne!(code, 0);
    assert!(err.contains("fidelity"));
}
