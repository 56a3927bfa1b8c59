use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pet"))
        .args(args)
        .output()
        .expect("failed to run the pet binary")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{
  "task": "topk:1",
  "instance": {"means": [1.0, 0.0, 0.2]},
  "delta": 0.1,
  "algorithms": [{"name": "pet"}, {"name": "batched_tas", "checkpoint_base": 30}],
  "trials": 6,
  "master_seed": 5
}"#;

#[test]
fn solve_two_arm_bai() {
    let v = json(&pet(&["solve", "--task", "topk:1", "--means", "1,0.5", "--sigma2", "1"]));
    assert!((v["t_star"].as_f64().unwrap() - 32.0).abs() < 1e-9);
    assert_eq!(v["w_star"].as_array().unwrap().len(), 2);
}

#[test]
fn solve_degenerate_reports_infinite() {
    let v = json(&pet(&["solve", "--task", "threshold:0.5", "--means", "0.5,0.9"]));
    assert_eq!(v["t_star"], "infinite");
}

#[test]
fn ball_reports_hardest_instance() {
    let v = json(&pet(&["ball", "--task", "topk:1", "--center", "1,0.5", "--radius", "0.1", "--sigma2", "1"]));
    let b: Vec<f64> = serde_json::from_value(v["hardest"].clone()).unwrap();
    assert!((b[0] - 0.9).abs() < 1e-12 && (b[1] - 0.6).abs() < 1e-12);
    assert!((v["t_bar"].as_f64().unwrap() - 800.0 / 9.0).abs() < 1e-6);
}

#[test]
fn lowerbound_at_known_complexity_is_zero() {
    let v = json(&pet(&[
        "lowerbound", "--tstar", "10", "--tmin", "10", "--delta", "0.05", "--gamma", "2", "--bigdelta", "0.5",
    ]));
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
    let out = pet(&[
        "lowerbound", "--tstar", "1", "--tmin", "10", "--delta", "0.05", "--gamma", "2", "--bigdelta", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = pet(&["bench", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv_a = std::fs::read(a.join("runs.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("runs.csv")).unwrap());
    assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 13);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["algorithms"].as_array().unwrap().len(), 2);
    assert!(a.join("bounds.json").exists());
}

#[test]
fn run_replays_a_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let v = json(&pet(&["run", "--config", cfg.to_str().unwrap(), "--trial", "2"]));
    assert_eq!(v["trial"], 2);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    assert_eq!(v["records"][0]["algorithm"], "pet");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"trials\": 6", "\"trials\": 6, \"trails\": 1"));
    let out = pet(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trails") && err.contains("line"), "{err}");
}

#[test]
fn literal_threshold_instance_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("tbp_literal.json");
    let out = pet(&["bench", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold"));
}

#[test]
fn phase_cap_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
      "task": "topk:1",
      "instance": {"means": [0.01, 0.0]},
      "delta": 0.05,
      "algorithms": [{"name": "pet", "max_phases": 1}],
      "trials": 2,
      "master_seed": 1
    }"#;
    let cfg = write_config(dir.path(), body);
    let out_dir = dir.path().join("out");
    let out = pet(&["bench", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn shipped_configs_parse() {
    for name in ["bai10.json", "tbp_hard.json", "tbp_literal.json", "bai2_fast.json"] {
        let text = std::fs::read_to_string(configs().join(name)).unwrap();
        pet_core::harness::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
