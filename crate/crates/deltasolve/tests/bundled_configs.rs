//! Decay scans driven through the binary with the bundled configurations.

use std::path::PathBuf;
use std::process::Command;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn decay_json(name: &str) -> serde_json::Value {
    let out = Command::new(env!("CARGO_BIN_EXE_deltasolve"))
        .args(["decay", "--config", config(name).to_str().unwrap(), "--format", "json"])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{name}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn n1_alpha1_decay_rate() {
    let v = decay_json("n1_alpha1.json");
    let slope = v["slope"].as_f64().unwrap();
    assert!((-1.55..=-1.45).contains(&slope), "slope {slope}");
    assert!(v["c_theorem"].as_f64().unwrap().is_finite());
}

#[test]
fn n1_resonant_decay_rate() {
    let v = decay_json("n1_resonant.json");
    let slope = v["slope"].as_f64().unwrap();
    assert!((-0.55..=-0.45).contains(&slope), "slope {slope}");
}

#[test]
fn n3_chain_decay_rate() {
    let v = decay_json("n3_chain.json");
    let slope = v["slope"].as_f64().unwrap();
    assert!((-1.6..=-1.4).contains(&slope), "slope {slope}");
    let c = v["c_theorem"].as_f64().unwrap();
    assert!(c.is_finite() && c > 0.0, "C = {c}");
}

#[test]
fn n1_bound_full_evolution_does_not_decay() {
    let v = decay_json("n1_bound.json");
    let slope = v["slope"].as_f64().unwrap();
    assert!(slope.abs() <= 0.05, "slope {slope}");
}
