//! The binary end to end: exit codes, config files, env budgets and report
//! files.

use std::process::{Command, Output};

fn powersieve(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_powersieve"));
    cmd.args(args).env_remove("POWERSIEVE_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_report_json() {
    let o = powersieve(&["count", "--poly", "x1^3+x2^3", "--n", "2", "--r", "2", "--B", "20"], &[]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["B", "r", "poly", "exact_count", "weighted_count", "zero_count"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    // x1 = -x2 alone gives 41 zero values.
    assert!(v["exact_count"].as_u64().unwrap() >= 41);
}

#[test]
fn exit_statuses() {
    let neg = powersieve(&["count", "--B", "-1"], &[]);
    assert_eq!(neg.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&neg.stderr).contains("B must be at least 1"));
    assert_eq!(powersieve(&["count", "--frobnicate"], &[]).status.code(), Some(1));
    assert_eq!(powersieve(&["count", "--poly", "x1^", "--B", "5"], &[]).status.code(), Some(1));
    assert_eq!(powersieve(&["nonsense"], &[]).status.code(), Some(1));
    let budget = powersieve(&["count", "--poly", "x1^3+x2^3", "--B", "20"], &[("POWERSIEVE_BUDGET", "100")]);
    assert_eq!(budget.status.code(), Some(2));
    let flag_budget = powersieve(&["count", "--poly", "x1^3+x2^3", "--B", "20", "--box-points", "50"], &[]);
    assert_eq!(flag_budget.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sum of two cubes\ncommand = count\npoly = x1^3 + x2^3\nn = 2\nr = 2\nB = 10\n").unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = powersieve(&["count", "--config", path], &[]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    assert_eq!(v["B"], 10);
    let overridden = powersieve(&["count", "--config", path, "--B", "20"], &[]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&overridden)).unwrap();
    assert_eq!(v["B"], 20);
    let wrong = powersieve(&["fit", "--config", path], &[]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn csv_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.csv");
    let o = powersieve(
        &["fit", "--poly", "x1^3+x2^3", "--B-list", "10,20,40,80", "--format", "csv", "--output", out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(!text.contains('\r'));
    let one = powersieve(&["count", "--poly", "x1^3+x2^3", "--B", "10", "--format", "csv"], &[]);
    assert_eq!(stdout(&one).lines().count(), 2);
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 7] = [
        &["sieve", "--poly", "x1^3+x2^3", "--B", "30", "--allow-support-violation"],
        &["charsum", "--poly", "x1^3+x2^3", "--h", "x1^2+x2^2", "--p-list", "7,11", "--draws", "20", "--q", "35"],
        &["vdc", "--poly", "x1^3+x2^3", "--q1", "7", "--q2", "13", "--B", "26"],
        &["poisson", "--poly", "x1^3+x2^3", "--h", "-x1^3 - x2^3 + 3*x1^2 + 3*x1 + 6*x2^2 + 12*x2 + 9", "--q", "35", "--L", "20"],
        &["geometry", "--poly", "x1^3+x2^3+x3^3", "--p", "7", "--h-box", "2"],
        &["fit", "--poly", "x1^3+x2^3", "--B-list", "10,20,40"],
        &["selftest", "--seed", "3"],
    ];
    for args in cases {
        let o = powersieve(args, &[]);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let _: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    }
}

#[test]
fn help_states_formulas() {
    for (sub, needle) in [
        ("count", "f(x) = y^r"),
        ("sieve", "Σ = diagonal + coprime"),
        ("charsum", "e_p(a h(x) + b g(x) + v·x)"),
        ("vdc", "H^{2n}|T|² <= Σ1 Σ2"),
        ("poisson", "q^{-2} φ(q)"),
        ("geometry", "H^{n-s} + H^n p^{-s}"),
        ("fit", "n - 3n/(2n+10)"),
        ("selftest", "χ(ab) = χ(a)χ(b)"),
    ] {
        let o = powersieve(&[sub, "--help"], &[]);
        assert!(o.status.success());
        assert!(stdout(&o).contains(needle), "{sub}: {}", stdout(&o));
    }
}

#[test]
fn selftest_is_deterministic() {
    let a = powersieve(&["selftest"], &[]);
    let b = powersieve(&["selftest"], &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
