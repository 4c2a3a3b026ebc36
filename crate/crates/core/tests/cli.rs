//! End-to-end behavior of the `pflab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn pflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pflab"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn run_to(path: &Path, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["-q", "--paths", "2000", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = pflab(&args);
    assert!(code(&out) <= 1, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn passing_experiment_exits_zero_with_schema() {
    let out = pflab(&["-q", "-e", "reflection", "--paths", "2000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        for key in [
            "check",
            "analytic",
            "estimate",
            "std_error",
            "z",
            "pass",
            "seed",
            "n",
        ] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
    }
}

#[test]
fn failed_check_exits_one() {
    let out = pflab(&[
        "-q",
        "-e",
        "azema-84",
        "--paths",
        "2000",
        "--tol-multiplier",
        "1e-9",
    ]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["failed"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&pflab(&["-e", "no-such-experiment"])), 2);
    assert_eq!(code(&pflab(&["--paths", "0"])), 2);
    assert_eq!(code(&pflab(&["--tol-multiplier", "-1"])), 2);
    assert_eq!(code(&pflab(&["--format", "xml"])), 2);
    assert_eq!(code(&pflab(&["--bogus"])), 2);
    assert_eq!(
        code(&pflab(&[
            "-e",
            "reflection",
            "--paths",
            "2000",
            "--out",
            "/nonexistent/dir/x.json"
        ])),
        2
    );
}

#[test]
fn env_overrides_flags_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_pflab"))
        .args(["-q", "-e", "reflection"])
        .env_clear()
        .env("PFLAB_PATHS", "1500")
        .env("PFLAB_SEED", "9")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 9);
    assert!(v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["n"] == 1500));
}

#[test]
fn full_suite_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(&dir.path().join("a.json"), &["--threads", "1"]);
    let b = run_to(&dir.path().join("b.json"), &["--threads", "1"]);
    let c = run_to(&dir.path().join("c.json"), &["--threads", "3"]);
    assert!(!a.is_empty());
    assert!(a == b, "repeated runs differ");
    assert!(a == c, "worker count changes the output");
}

#[test]
fn csv_has_header_and_one_row_per_check() {
    let out = pflab(&[
        "-q",
        "-e",
        "reflection",
        "--paths",
        "2000",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("check,"));
    assert!(lines.count() >= 1);
}

#[test]
fn list_names_every_experiment() {
    let out = pflab(&["list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "azema-84",
        "pfh-residuals",
        "strict-local",
        "levy-esscher",
        "asian-moments",
    ] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn rho_curve_shape() {
    let out = pflab(&["rho-curve", "--points", "50"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,rho,t,r"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    assert!((rows[0][2] - 1e-4).abs() < 1e-12 && (rows[49][2] - 400.0).abs() < 1e-9);
    for r in &rows {
        assert!((r[0] - 1.0 / r[2].sqrt()).abs() < 1e-9 * r[0]);
        assert!(r[3] > 0.0 && r[1] > 0.0);
    }
    // r rises from 0 and decays again: an interior maximum
    let peak = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[3].total_cmp(&b.1[3]))
        .unwrap()
        .0;
    assert!(0 < peak && peak < 49);
    assert_eq!(code(&pflab(&["rho-curve", "--points", "1"])), 2);
}

#[test]
fn asian_curve_columns() {
    let out = pflab(&["asian-curve", "--n-max", "3", "--points", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,a_1,a_2,a_3"));
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 4);
        assert!((v[1] - 1.0).abs() < 1e-9 && v[2] >= 1.0 && v[3] >= v[2]);
    }
    assert_eq!(code(&pflab(&["asian-curve", "--n-max", "5"])), 2);
}
