//! Exit codes and output of the `gradavg` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn gradavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradavg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn boston() -> String {
    let dir = std::env::var_os("GRADAVG_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"));
    dir.join("boston_housing.csv").display().to_string()
}

#[test]
fn success_prints_a_summary_line() {
    let out = gradavg(&["quadratic", "--optimizer", "nag", "--epochs", "10"]);
    assert_eq!(code(&out), 0);
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(
        line.starts_with("optimizer=nag final_test_metric="),
        "{line}"
    );
    assert!(
        line.contains(" grad_evals=10 status=completed wall_ms="),
        "{line}"
    );
}

#[test]
fn property_failure_exits_1() {
    let out = gradavg(&[
        "check",
        "--suite",
        "descent",
        "--descent-alpha-factor",
        "30",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("FAIL descent_psd"));
}

#[test]
fn passing_checks_exit_0() {
    let out = gradavg(&["check", "--suite", "oracles"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn divergence_exits_2() {
    let out = gradavg(&["quadratic", "--lr", "3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("status=diverged"));
}

#[test]
fn io_and_config_errors_exit_3() {
    assert_eq!(
        code(&gradavg(&["regress", "--data", "/nonexistent.csv"])),
        3
    );
    assert_eq!(code(&gradavg(&["regress"])), 3);
    assert_eq!(code(&gradavg(&["quadratic", "--momentum", "1.5"])), 3);
    assert_eq!(code(&gradavg(&["quadratic", "--optimizer", "adam"])), 3);
    assert_eq!(code(&gradavg(&["quadratic", "--bogus"])), 3);
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&gradavg(&["--help"])), 0);
}

#[test]
fn regress_writes_identical_metrics_twice() {
    let dir = tempfile::tempdir().unwrap();
    let data = boston();
    let files: Vec<_> = (0..2)
        .map(|i| {
            let p = dir.path().join(format!("{i}.csv"));
            let out = gradavg(&[
                "regress",
                "--data",
                &data,
                "--epochs",
                "3",
                "--seed",
                "4",
                "--optimizer",
                "gradavg",
                "--out",
                p.to_str().unwrap(),
            ]);
            assert_eq!(code(&out), 0);
            std::fs::read(p).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("epoch,train_loss,test_metric\n"));
}

#[test]
fn grid_writes_one_file_per_optimizer() {
    let dir = tempfile::tempdir().unwrap();
    let out = gradavg(&[
        "grid",
        "quadratic",
        "--epochs",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let order: Vec<_> = stdout
        .lines()
        .filter_map(|l| l.strip_prefix("optimizer="))
        .map(|l| l.split(' ').next().unwrap())
        .collect();
    assert_eq!(order, ["gradavg", "momentum", "nag", "sgd"]);
    for k in ["gradavg", "momentum", "nag", "sgd"] {
        assert!(stdout.contains(&format!("optimizer={k} ")));
        assert!(dir.path().join(format!("{k}.csv")).exists());
    }
    assert!(stdout
        .lines()
        .last()
        .unwrap()
        .starts_with("gradavg_vs_sgd_gap="));
}
