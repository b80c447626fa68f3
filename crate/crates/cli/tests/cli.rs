use std::path::{Path, PathBuf};
use std::process::Command;

fn proxcat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_proxcat"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

#[test]
fn ppa_scenario_passes_and_writes_trace() {
    let out = tempfile::tempdir().unwrap();
    let run = proxcat()
        .args(["ppa", "--config"])
        .arg(scenario("euclid-ppa-rate"))
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS ppa_rate[ε=0.1] bound=400")), "{stdout}");
    assert!(stdout.lines().last().unwrap().starts_with("PASS euclid-ppa-rate"));
    let trace = std::fs::read_to_string(out.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("n,gamma_n,d_to_p,step"));
    assert_eq!(lines.next(), Some("0,1.0000000000000000e0,1.0000000000000000e0,5.0000000000000000e-1"));
    assert!(!trace.contains('\r'));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn expansive_family_exits_one() {
    let out = tempfile::tempdir().unwrap();
    let run = proxcat().args(["check", "--config"]).arg(scenario("expansive-check")).arg("--out").arg(out.path()).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("FAIL expansive@euclidean2:nonexpansive")), "{stdout}");
}

#[test]
fn command_mismatch_exits_two() {
    let out = tempfile::tempdir().unwrap();
    let run = proxcat().args(["check", "--config"]).arg(scenario("euclid-ppa-rate")).arg("--out").arg(out.path()).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn empty_eps_list_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut config: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(scenario("euclid-ppa-rate")).unwrap()).unwrap();
    config["eps_list"] = serde_json::json!([]);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let run = proxcat().args(["ppa", "--config"]).arg(&path).arg("--out").arg(dir.path().join("out")).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8(run.stderr).unwrap().contains("eps_list"));
}

#[test]
fn missing_config_exits_two() {
    let run = proxcat().args(["rates", "--config", "/nonexistent/proxcat.json"]).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn seed_override_changes_sampled_output_only() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<String> = ["1", "1", "2"]
        .iter()
        .enumerate()
        .map(|(i, seed)| {
            let out = dir.path().join(i.to_string());
            let run = proxcat().args(["check", "--config"]).arg(scenario("uniform-p2")).arg("--out").arg(&out).args(["--seed", seed]).output().unwrap();
            assert_eq!(run.status.code(), Some(0));
            std::fs::read_to_string(out.join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_ne!(runs[0], runs[2]);
}
