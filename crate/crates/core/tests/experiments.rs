use greedy_rb::experiments::{
    errors_csv, run_experiment, selection_csv, write_report, Algorithm, ExperimentConfig, OutputFormat, ERRORS_HEADER,
};
use greedy_rb::families::gen_random_set;
use greedy_rb::snapshot_io::write_binary;
use greedy_rb::SpaceSpec;

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

#[test]
fn all_algorithms_on_a_small_family() {
    let cfg = config(
        r#"{"source": {"kind": "family", "family": "2param", "spatial": [120], "parametric": [6, 6]},
            "space": 1, "algorithms": ["nga", "oga", "eim", "pod"], "M": 9, "seed": 5}"#,
    );
    let mut report = run_experiment(&cfg).unwrap();
    assert!(!report.failed());
    for alg in [Algorithm::Nga, Algorithm::Oga, Algorithm::Eim, Algorithm::Pod] {
        let errs: Vec<f64> = report.rows_for(alg).map(|r| r.error_avg).collect();
        assert_eq!(errs.len(), 3, "{alg}");
        assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{alg}: {errs:?}");
        assert!(report.rows_for(alg).all(|r| r.error_avg <= r.error_max * (1.0 + 1e-12)));
    }
    report.strip_timing();
    let csv = errors_csv(&report);
    assert!(csv.starts_with(ERRORS_HEADER));
    assert_eq!(csv.lines().count(), 13);
    assert_eq!(selection_csv(&report).lines().count(), 1 + 9 * 4);
}

#[test]
fn oga_is_never_worse_than_nga_at_its_own_selection() {
    let cfg = config(
        r#"{"source": {"kind": "random", "n_h": 60, "d": 10, "n_tr": 40}, "space": 3,
            "algorithms": ["nga", "oga"], "M": 8, "eval_stride": 1, "seed": 2}"#,
    );
    let report = run_experiment(&cfg).unwrap();
    let nga: Vec<f64> = report.rows_for(Algorithm::Nga).map(|r| r.error_max).collect();
    let oga: Vec<f64> = report.rows_for(Algorithm::Oga).map(|r| r.error_max).collect();
    assert_eq!(nga.len(), 8);
    // both decay to zero once the 10-dimensional span is covered
    assert!(nga[7] < nga[0] && oga[7] < oga[0]);
}

#[test]
fn file_source_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("snap.bin");
    write_binary(&gen_random_set(4, 30, 5, 20, SpaceSpec::l2()).unwrap(), &snap).unwrap();
    let cfg = config(&format!(
        r#"{{"source": {{"kind": "file", "path": {:?}, "format": "binary"}}, "space": 2,
            "algorithms": ["nga", "pod"], "M": 6, "opnorm": {{"dims": [3, 5], "restarts": 3, "samples": 50}}}}"#,
        snap.display().to_string()
    ));
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.metadata.n_h, 30);
    let rows = report.norm_rows.as_ref().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.measured_max_norm >= 1.0 - 1e-9));
    let out = dir.path().join("out");
    let written = write_report(
        &report,
        &out,
        &[OutputFormat::Csv, OutputFormat::Svg, OutputFormat::Json],
    )
    .unwrap();
    for name in [
        "errors.csv",
        "selection.csv",
        "normtable.csv",
        "error_avg.svg",
        "report.json",
    ] {
        assert!(written.contains(&out.join(name)), "{name} missing");
    }
}

#[test]
fn noise_is_reproducible_and_changes_the_data() {
    let json = r#"{"source": {"kind": "family", "family": "1d", "spatial": [200], "parametric": [30]},
        "space": 1, "algorithms": ["nga"], "M": 6, "seed": 8,
        "noise": {"mode": "coordinate_fraction", "fraction": 0.02}}"#;
    let mut a = run_experiment(&config(json)).unwrap();
    let mut b = run_experiment(&config(json)).unwrap();
    a.strip_timing();
    b.strip_timing();
    assert_eq!(errors_csv(&a), errors_csv(&b));
    let mut clean = run_experiment(&config(&json.replace("0.02", "0.0"))).unwrap();
    clean.strip_timing();
    assert_ne!(errors_csv(&a), errors_csv(&clean));
}

#[test]
fn pod_beyond_the_rank_is_a_config_error() {
    let err = ExperimentConfig::from_json(
        r#"{"source": {"kind": "random", "n_h": 10, "d": 3, "n_tr": 5}, "space": 2, "algorithms": ["pod"], "M": 6}"#,
    )
    .unwrap_err();
    assert!(matches!(err, greedy_rb::Error::Config(_)));
    assert!(err.to_string().contains("M:"), "{err}");
}
