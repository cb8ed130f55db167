//! Black-box tests of the command-line binary: exit codes, output sinks,
//! JSON mirroring, and failure diagnostics. Workloads are kept small via a
//! throwaway config file.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nafd")
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.toml");
    std::fs::write(
        &path,
        "[nsga2]\npop_size = 10\ngenerations = 5\n\n\
         [dqn]\niterations = 10\n\n\
         [montecarlo]\ntrials = 40\n",
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn validate_passes_at_default_tolerance() {
    let out = run(&[
        "validate", "--b-min", "3", "--b-max", "4", "--trials", "60", "--seed", "1",
    ]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("scheme,csi_mode,ic_mode,bits,user,closed_form"));
    // 2 bit levels x (3 DL + 2 UL users)
    assert_eq!(stdout.lines().count(), 1 + 2 * 5);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("validation passed"));
}

#[test]
fn validate_fails_at_zero_tolerance() {
    let out = run(&[
        "validate", "--b-min", "3", "--b-max", "3", "--trials", "60", "--seed", "1",
        "--tol", "0",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("validation failed"));
}

#[test]
fn missing_config_is_a_diagnosed_error() {
    let out = run(&["sweep-bits", "--config", "/nonexistent/nowhere.toml"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error:"), "stderr was: {stderr}");
}

#[test]
fn malformed_bit_range_is_rejected() {
    let out = run(&["sweep-bits", "--b-min", "9", "--b-max", "2"]);
    assert!(!out.status.success());
    let out = run(&["sweep-bits", "--b-min", "0", "--b-max", "4"]);
    assert!(!out.status.success());
    let out = run(&["sweep-bits", "--b-min", "1", "--b-max", "13"]);
    assert!(!out.status.success());
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep-bits", "--b-min", "2", "--b-max", "3", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("scheme,csi_mode,ic_mode,bits,sum_se,ee"));
    // 2 bit levels x 4 mode combinations
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn json_flag_emits_parseable_records() {
    let out = run(&["tradeoff", "--m-min", "6", "--m-max", "8", "--json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    // 2 antenna counts x 6 bit levels
    assert_eq!(rows.len(), 12);
    let first = rows[0].as_object().unwrap();
    assert!(first["m"].is_number());
    assert!(first["f1_se"].is_number());
}

#[test]
fn tradeoff_row_count_matches_grid() {
    let out = run(&[
        "tradeoff", "--b-min", "4", "--b-max", "9", "--m-min", "6", "--m-max", "32",
        "--m-step", "2",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1 + 6 * 14);
}

#[test]
fn optimize_nsga2_emits_feasible_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = run(&[
        "optimize", "--method", "nsga2", "--config", cfg.to_str().unwrap(), "--seed", "2",
    ]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "f1_se,f2_ee,feasible,bits_ul_raus,bits_dl_raus,bits_dl_users"
    );
    assert!(lines.clone().count() >= 1);
    assert!(lines.all(|l| l.contains(",true,")));
}

#[test]
fn optimize_dqn_zero_iterations_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("degenerate.toml");
    std::fs::write(&cfg, "[dqn]\niterations = 0\n").unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "optimize", "--method", "dqn", "--config", cfg.to_str().unwrap(),
        "--trace-out", trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2); // header + the initial state
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(
        trace_text.trim(),
        "iter,reward,loss,epsilon,best_reward_so_far"
    );
}

#[test]
fn scheme_flag_changes_the_output() {
    let mr = run(&["sweep-bits", "--b-min", "4", "--b-max", "4"]);
    let zf = run(&["sweep-bits", "--b-min", "4", "--b-max", "4", "--scheme", "zf"]);
    assert!(mr.status.success() && zf.status.success());
    assert_ne!(mr.stdout, zf.stdout);
}

#[test]
fn seed_changes_the_geometry() {
    let a = run(&["sweep-bits", "--b-min", "4", "--b-max", "4", "--seed", "1"]);
    let b = run(&["sweep-bits", "--b-min", "4", "--b-max", "4", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}
