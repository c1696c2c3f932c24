use std::process::{Command, Output};

fn greedy_rb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greedy-rb"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(greedy_rb(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(greedy_rb(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(greedy_rb(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_config_reports_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"source": {"kind": "random", "n_h": 4, "d": 2, "n_tr": 3}, "space": 2, "algorithms": ["nga"], "M": 0}"#,
    )
    .unwrap();
    let out = greedy_rb(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('M'));
}

#[test]
fn equiv_and_counterexample_pass() {
    for args in [
        &["equiv", "--p", "2"][..],
        &["equiv", "--p", "inf"],
        &["counterexample"],
    ] {
        let out = greedy_rb(args);
        assert!(out.status.success(), "{args:?}: {}", stdout(&out));
        assert!(stdout(&out).contains("PASS"), "{args:?}");
    }
}

#[test]
fn run_with_overrides_and_gen() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"source": {"kind": "random", "n_h": 30, "d": 6, "n_tr": 20}, "space": 1, "algorithms": ["nga", "eim"], "M": 9}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = greedy_rb(&[
        "--no-timing",
        "run",
        cfg.to_str().unwrap(),
        "--m",
        "6",
        "--p",
        "inf",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let errors = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 1 + 2 * 2);

    let snap = dir.path().join("snap.csv");
    let out = greedy_rb(&[
        "gen",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "-o",
        snap.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&snap).unwrap();
    assert_eq!(text.lines().count(), 31);
}

#[test]
fn normtable_prints_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"source": {"kind": "random", "n_h": 20, "d": 8, "n_tr": 15}, "space": 2, "algorithms": ["nga"], "M": 6, "opnorm": {"dims": [3, 6]}}"#).unwrap();
    let out = greedy_rb(&[
        "normtable",
        cfg.to_str().unwrap(),
        "--restarts",
        "2",
        "--samples",
        "20",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o/normtable.csv").exists() || stdout(&out).contains("3"));
}
