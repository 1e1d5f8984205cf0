//! End-to-end checks of the binary: determinism, manifest round-trips,
//! and exit codes.

use std::path::Path;
use std::process::Command;

fn overrot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_overrot"))
}

fn write_config(dir: &Path, out_dir: &Path, seed: u64) -> std::path::PathBuf {
    let config = serde_json::json!({
        "model": {"u": 1.0, "t1": 1.0, "t2": 1.0},
        "variant": "iswap_chain",
        "tau_g": 5.0,
        "step_g": 0.05,
        "noise": {"std_dev": 0.025, "temporal_mode": "per_step_iid", "seed": seed},
        "ensemble_size": 3,
        "initial_state": [1, 2],
        "observables": ["n1", "sigma2"],
        "backends": ["faulty_circuit", "ideal_exact"],
        "out_dir": out_dir,
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn same_config_and_seed_produce_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), &out_a, 7);

    let status = overrot().args(["simulate", "--config"]).arg(&cfg).status().unwrap();
    assert!(status.success());
    let status = overrot()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap();
    assert!(status.success());

    for file in ["trajectories.csv", "spectrum.csv", "summary.json"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn different_seeds_change_the_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), &out_a, 7);
    assert!(overrot().args(["simulate", "--config"]).arg(&cfg).status().unwrap().success());
    assert!(overrot()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .args(["--seed", "8"])
        .status()
        .unwrap()
        .success());
    let a = std::fs::read(out_a.join("trajectories.csv")).unwrap();
    let b = std::fs::read(out_b.join("trajectories.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn rerunning_from_a_manifest_reproduces_results() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), &out_a, 21);
    assert!(overrot().args(["simulate", "--config"]).arg(&cfg).status().unwrap().success());

    // The manifest embeds the configuration; simulate accepts it directly.
    let manifest = out_a.join("manifest.json");
    assert!(overrot()
        .args(["simulate", "--config"])
        .arg(&manifest)
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap()
        .success());
    for file in ["trajectories.csv", "spectrum.csv"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs after manifest round-trip");
    }
}

#[test]
fn worker_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), &out_a, 3);
    assert!(overrot()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--workers", "1"])
        .status()
        .unwrap()
        .success());
    assert!(overrot()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .args(["--workers", "4"])
        .status()
        .unwrap()
        .success());
    let a = std::fs::read(out_a.join("trajectories.csv")).unwrap();
    let b = std::fs::read(out_b.join("trajectories.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validate_reports_warnings_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let cfg = write_config(tmp.path(), &out, 1);
    let output = overrot().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).contains("ok"));

    // Non-integer step count: usage error, exit code 1.
    let bad = serde_json::json!({
        "model": {"u": 1.0, "t1": 1.0, "t2": 1.0},
        "variant": "cz_chain",
        "tau_g": 1.0,
        "step_g": 0.3,
        "noise": {"std_dev": 0.0, "temporal_mode": "per_step_iid", "seed": 1},
        "ensemble_size": 1,
        "initial_state": [1],
        "observables": ["n1"],
        "backends": ["ideal_exact"],
        "out_dir": out,
    });
    let bad_path = tmp.path().join("bad.json");
    std::fs::write(&bad_path, serde_json::to_string(&bad).unwrap()).unwrap();
    let output = overrot().args(["validate", "--config"]).arg(&bad_path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn exit_codes_follow_the_contract() {
    // Unknown preset: usage error.
    let out = overrot().args(["preset", "fig42"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Missing config file: usage error.
    let out = overrot()
        .args(["simulate", "--config", "/nonexistent/nope.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Valid budget query: success, table printed.
    let out = overrot()
        .args(["budget", "--fidelity", "0.99"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("7.07"), "budget table: {text}");
    // Out-of-range fidelity: usage error.
    let out = overrot()
        .args(["budget", "--fidelity", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_directory_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), Path::new("/proc/overrot-denied/out"), 5);
    let out = overrot().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preset_config_only_writes_configs_without_running() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("fig6");
    let out = overrot()
        .args(["preset", "fig6", "--config-only", "--out"])
        .arg(&root)
        .output()
        .unwrap();
    assert!(out.status.success());
    for var in ["var_0.05", "var_0.1", "var_0.25", "var_0.5"] {
        let p = root.join(var).join("config.json");
        assert!(p.exists(), "{}", p.display());
        assert!(!root.join(var).join("trajectories.csv").exists());
    }
}
