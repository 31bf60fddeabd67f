//! End-to-end behavior of the `routhe` binary: determinism, schemas and exit
//! codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn routhe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_routhe"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("routhe-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn run_is_deterministic() {
    let dir = tmp_dir("det");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let status = routhe()
            .args(["run", "--set", "t_end=6", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read(&out_a.join("run-central-potential.csv"));
    let b = read(&out_b.join("run-central-potential.csv"));
    assert_eq!(a, b, "identical configuration must give identical bytes");
    assert!(a.starts_with("# routhe-csv v1"));
    // no non-finite values anywhere
    assert!(!a.contains("NaN") && !a.contains("inf"));
}

#[test]
fn convergence_is_deterministic_and_reports_orders() {
    let dir = tmp_dir("conv");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let status = routhe()
            .args([
                "convergence",
                "--set",
                "h_list=0.2,0.1",
                "--set",
                "conv_t_end=4",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read(&out_a.join("convergence.csv"));
    let b = read(&out_b.join("convergence.csv"));
    assert_eq!(a, b);
    assert!(a.contains("fitted-order mp"));
}

#[test]
fn zero_span_run_emits_header_only() {
    let dir = tmp_dir("zero");
    let status = routhe()
        .args(["run", "--set", "t_end=0", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let body = read(&dir.join("run-central-potential.csv"));
    let data_lines = body
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .count();
    assert_eq!(data_lines, 1, "header only:\n{body}");
}

#[test]
fn bar_run_defect_column_is_tiny() {
    let dir = tmp_dir("bar");
    let status = routhe()
        .args(["run", "--set", "scenario=bar", "--set", "t_end=20", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let body = read(&dir.join("run-bar.csv"));
    for line in body.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let defect: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(defect <= 1e-10);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tmp_dir("cfg");
    let code = routhe()
        .args(["run", "--set", "scenario=unknown", "--out"])
        .arg(&dir)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
    let code = routhe()
        .args(["run", "--set", "h=never", "--out"])
        .arg(&dir)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
    // unreadable config file
    let code = routhe()
        .args(["run", "--config", "/nonexistent/path.cfg", "--out"])
        .arg(&dir)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
}

#[test]
fn check_failure_exits_1() {
    // κ = 0 removes the dissipation, so the expected-violation controls of
    // the synthetic suite genuinely fail
    let dir = tmp_dir("fail");
    let code = routhe()
        .args([
            "check",
            "--set",
            "scenario=synthetic-routh",
            "--set",
            "kappa=0",
            "--out",
        ])
        .arg(&dir)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(1));
}

#[test]
fn checks_pass_for_all_scenarios_and_mu_override() {
    let dir = tmp_dir("ok");
    for sets in [
        vec!["scenario=bar", "t_end=20"],
        vec!["scenario=central-potential", "t_end=20"],
        vec!["scenario=synthetic-routh", "t_end=20"],
        // zero momentum removes the centrifugal barrier, so this branch starts
        // in the outer potential well where the radial motion stays positive
        vec![
            "scenario=central-potential",
            "t_end=20",
            "mu=0",
            "r0=1.4",
            "r1=1.405",
            "rdot0=0.025",
        ],
    ] {
        let mut cmd = routhe();
        cmd.arg("check");
        for s in &sets {
            cmd.args(["--set", s]);
        }
        let code = cmd.arg("--out").arg(&dir).status().unwrap().code();
        assert_eq!(code, Some(0), "scenario config {sets:?}");
    }
}

#[test]
fn config_file_round_trip() {
    let dir = tmp_dir("file");
    let cfg_path = dir.join("experiment.cfg");
    std::fs::write(
        &cfg_path,
        "# comment\nscenario = central-potential\nh = 0.2\nt_end = 2\n",
    )
    .unwrap();
    let status = routhe()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--set", "t_end=4", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    // override wins: 4 time units at h = 0.2 → 21 rows
    let body = read(&dir.join("run-central-potential.csv"));
    let rows = body
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .count();
    assert_eq!(rows, 22); // header + 21 data rows
}

#[test]
fn concurrent_run_matches_sequential() {
    let dir = tmp_dir("concurrent");
    let seq = dir.join("seq");
    let par = dir.join("par");
    let status = routhe()
        .args(["run", "--set", "t_end=6", "--out"])
        .arg(&seq)
        .status()
        .unwrap();
    assert!(status.success());
    let status = routhe()
        .args([
            "run",
            "--set",
            "t_end=6",
            "--set",
            "concurrent=true",
            "--out",
        ])
        .arg(&par)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        read(&seq.join("run-central-potential.csv")),
        read(&par.join("run-central-potential.csv"))
    );
}

#[test]
fn solver_failure_flushes_partial_csv_and_exits_3() {
    // a one-iteration Newton cap cannot meet the residual tolerance, so the
    // variational integrator fails on its first solve
    let dir = tmp_dir("solverfail");
    let code = routhe()
        .args(["run", "--set", "newton_max_iter=1", "--out"])
        .arg(&dir)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(3));
    let body = read(&dir.join("run-central-potential.csv"));
    assert!(body.contains("# failure step="), "{body}");
    let data_rows = body
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .count();
    assert!(data_rows >= 2, "partial rows flushed:\n{body}");
}
