use std::path::Path;
use std::process::Command;

use serde_json::Value;
use sha2::{Digest, Sha256};

fn lab(out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_confinement-lab")).arg("--out").arg(out).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_checksums(dir: &Path) -> Value {
    let cfg = json(&dir.join("run_config.json"));
    assert_eq!(cfg["schema_version"], 1);
    for f in cfg["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(dir.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    cfg
}

#[test]
fn solve_writes_snapshot_and_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["solve", "--p", "4", "--lambda", "-1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = assert_checksums(dir.path());
    assert_eq!(cfg["config"]["command"]["solve"]["lambda"], -1.0);
    let names: Vec<&str> = cfg["outputs"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["u.json", "u.bin", "meta.json"]);
    let meta = json(&dir.path().join("meta.json"));
    assert!(meta["mass"].as_f64().unwrap() > 0.0);
    assert!(meta["positive"].as_bool().unwrap());
}

#[test]
fn invalid_exponent_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["solve", "--p", "6.5", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(dir.path(), &["solve", "--p", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_checks_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["verify", "--theorem", "A.3", "--p", "4", "--tau", "0.4,0.2", "--k", "24", "--mz", "96"]);
    assert!(o.status.success());
    let rep = json(&dir.path().join("verify.json"));
    assert_eq!(rep["theorem"], "A.3");
    let checks = rep["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(["pass", "fail", "undetermined"].contains(&c["verdict"].as_str().unwrap()));
    }
    assert!(["pass", "fail", "undetermined"].contains(&rep["verdict"].as_str().unwrap()));
    assert_checksums(dir.path());

    // computation errors are reported, not raised
    let o = lab(dir.path(), &["verify", "--theorem", "1.3", "--p", "4", "--lambda", "1.0"]);
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("verify.json"))["verdict"], "undetermined");
}

#[test]
fn limits_writes_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["limits", "--p", "4"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("w1d.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "coordinate,value");
    let summary = json(&dir.path().join("limits.json"));
    let a = summary["soliton_1d_amplitude"].as_f64().unwrap();
    assert!((summary["shooting_1d"].as_f64().unwrap() / a - 1.0).abs() < 1e-8);
    assert!(dir.path().join("v3d.csv").exists());
    assert_checksums(dir.path());
}
