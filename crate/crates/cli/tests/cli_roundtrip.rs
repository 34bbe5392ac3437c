//! Binary-level tests: CSV determinism, the sweep -> plot round trip
//! against a golden file, and exit-code conventions.

use std::path::PathBuf;
use std::process::Command;

fn bpriv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bpriv"))
}

fn golden_args(out: &str) -> Vec<String> {
    [
        "sweep", "--eta", "0.8", "--s", "0", "--n-eff", "2", "--r-min", "-0.5", "--r-max", "0.5",
        "--r-steps", "3", "--out", out,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[test]
fn sweep_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let status = bpriv().args(golden_args(path.to_str().unwrap())).status().unwrap();
        assert!(status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "identical config must produce byte-identical CSV");
}

#[test]
fn sweep_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("three.csv");
    let status = bpriv().args(golden_args(out.to_str().unwrap())).status().unwrap();
    assert!(status.success());
    let produced = std::fs::read_to_string(&out).unwrap();
    let golden_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sweep_3pt.csv");
    let golden = std::fs::read_to_string(&golden_path).unwrap();
    assert_eq!(produced, golden, "sweep output drifted from the golden file");
}

#[test]
fn plot_consumes_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig.csv");
    let status = bpriv()
        .args([
            "sweep", "--eta", "0.8", "--s", "0,1", "--n-eff", "2", "--r-steps", "9", "--out",
            csv.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let svg_path = dir.path().join("fig.svg");
    let status = bpriv()
        .args(["plot", csv.to_str().unwrap(), "--out", svg_path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn usage_errors_exit_with_2() {
    // invalid grid
    let status = bpriv()
        .args(["sweep", "--eta", "0.8", "--r-steps", "0", "--out", "/dev/null"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // unknown config key
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "nonsense=1\n").unwrap();
    let status = bpriv()
        .args(["sweep", "--config", cfg.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // malformed CSV for plot
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "eta,s\n1,2\n").unwrap();
    let status = bpriv().args(["plot", csv.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    // oracle regime violation names the limit and exits 2
    let out = bpriv()
        .args(["verify", "--oracle", "--n-eff", "2.0", "--tuples", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("N_eff"), "regime refusal must name the limit: {stderr}");
}

#[test]
fn env_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "r_steps=3\ns=0\neta=0.8\nn_eff=2\n").unwrap();
    let out_env = dir.path().join("env.csv");
    let status = bpriv()
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out_env.to_str().unwrap()])
        .env("BPRIV_R_STEPS", "5")
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out_env).unwrap();
    assert!(text.contains("# r_steps=5"));
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("eta,")).count();
    assert_eq!(rows, 5);
}
