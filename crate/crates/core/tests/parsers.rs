use std::fs;
use std::path::PathBuf;

use greedy_rb::experiments::ExperimentConfig;
use greedy_rb::families::gen_random_set;
use greedy_rb::snapshot_io::{from_binary, from_csv, to_binary, BINARY_MAGIC};
use greedy_rb::{Error, SpaceSpec};

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed-"))
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn binary_seeds_parse() {
    for (path, bytes) in corpus("snapshot_binary") {
        let ts = from_binary(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(to_binary(&ts), bytes);
    }
}

#[test]
fn csv_seeds_parse() {
    for (path, bytes) in corpus("snapshot_csv") {
        from_csv(&bytes, SpaceSpec::l2()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn config_seeds_parse() {
    for (path, bytes) in corpus("experiment_config") {
        let text = String::from_utf8(bytes).unwrap();
        let cfg = ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

fn header(n_h: f64, n_tr: f64) -> Vec<u8> {
    [BINARY_MAGIC, 1.0, n_h, n_tr, 2.0, 0.0, 0.0, 0.0]
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect()
}

#[test]
fn malformed_binary_is_rejected() {
    let good = to_binary(&gen_random_set(1, 6, 2, 3, SpaceSpec::l1()).unwrap());
    assert!(matches!(from_binary(&good[..good.len() - 8]), Err(Error::Parse(_))));
    assert!(matches!(from_binary(&good[..good.len() - 3]), Err(Error::Parse(_))));
    let mut bad_magic = good.clone();
    bad_magic[0] ^= 1;
    assert!(matches!(from_binary(&bad_magic), Err(Error::Parse(_))));
    // a huge declared size must not allocate
    assert!(matches!(from_binary(&header(1e12, 1e12)), Err(Error::Parse(_))));
    assert!(matches!(from_binary(&header(2.5, 1.0)), Err(Error::Parse(_))));
    let mut nan = header(1.0, 1.0);
    nan.extend_from_slice(&f64::NAN.to_le_bytes());
    assert!(matches!(from_binary(&nan), Err(Error::Parse(_))));
}

#[test]
fn malformed_csv_is_rejected() {
    for text in ["", "f0,f1\n1,2\n3\n", "f0\nabc\n", "f0\ninf\n", "(1 2),(3)\n1,2\n"] {
        assert!(from_csv(text.as_bytes(), SpaceSpec::l2()).is_err(), "{text:?}");
    }
}

#[test]
fn config_errors_carry_paths() {
    let err = ExperimentConfig::from_json(r#"{"source": {"kind": "random", "n_h": 4, "d": 2, "n_tr": 3}, "space": 2, "algorithms": ["nga"], "M": 2, "bogus": 1}"#)
        .unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    let err = ExperimentConfig::from_json(
        r#"{"source": {"kind": "random", "n_h": 4, "d": 2, "n_tr": 3}, "space": 0.5, "algorithms": ["nga"], "M": 2}"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("space"), "{err}");
}
