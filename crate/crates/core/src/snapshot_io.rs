//! Snapshot import and export.
//!
//! CSV: one snapshot per column, a header row naming each column by its
//! parameter tuple `(μ1 μ2 …)` (or `f0, f1, …` when the set has no
//! parameters), then `N_h` rows of values.
//!
//! Binary: eight little-endian `f64` header values
//! `[magic, version, N_h, N_tr, p-code, 0, 0, 0]` followed by the data in
//! column-major order. The p-code is `p` itself, with `0` meaning `p = ∞`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::algorithms::TrainingSet;
use crate::error::{Error, Result};
use crate::space::{Exponent, SpaceSpec};

pub const BINARY_MAGIC: f64 = 1_196_573_233.0;
pub const BINARY_VERSION: f64 = 1.0;
const HEADER_LEN: usize = 8;

fn p_code(space: SpaceSpec) -> f64 {
    match space.exponent() {
        Exponent::Infinity => 0.0,
        _ => space.p(),
    }
}

fn space_from_code(code: f64) -> Result<SpaceSpec> {
    if code == 0.0 {
        return Ok(SpaceSpec::linf());
    }
    SpaceSpec::new(code).map_err(|_| Error::parse(format!("invalid p-code {code}")))
}

pub fn to_binary(ts: &TrainingSet) -> Vec<u8> {
    let header = [
        BINARY_MAGIC,
        BINARY_VERSION,
        ts.n_h() as f64,
        ts.n_tr() as f64,
        p_code(ts.space),
        0.0,
        0.0,
        0.0,
    ];
    let mut out = Vec::with_capacity(8 * (HEADER_LEN + ts.data().len()));
    for v in header.iter().chain(ts.data()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn header_count(v: f64, what: &str) -> Result<usize> {
    if !(v >= 1.0 && v.fract() == 0.0 && v <= (1u64 << 40) as f64) {
        return Err(Error::parse(format!("invalid {what} {v} in header")));
    }
    Ok(v as usize)
}

pub fn from_binary(bytes: &[u8]) -> Result<TrainingSet> {
    if bytes.len() < 8 * HEADER_LEN {
        return Err(Error::parse(format!(
            "binary snapshot file too short ({} bytes)",
            bytes.len()
        )));
    }
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::parse("binary snapshot length is not a multiple of 8"));
    }
    let read = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    if read(0) != BINARY_MAGIC {
        return Err(Error::parse("bad magic number"));
    }
    if read(1) != BINARY_VERSION {
        return Err(Error::parse(format!("unsupported version {}", read(1))));
    }
    let n_h = header_count(read(2), "N_h")?;
    let n_tr = header_count(read(3), "N_tr")?;
    let space = space_from_code(read(4))?;
    let values = bytes.len() / 8 - HEADER_LEN;
    if n_h.checked_mul(n_tr) != Some(values) {
        return Err(Error::parse(format!(
            "header declares {n_h} x {n_tr} values but the file holds {values}"
        )));
    }
    let data: Vec<f64> = (HEADER_LEN..HEADER_LEN + values).map(read).collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::parse(format!("non-finite value at position {i}")));
    }
    TrainingSet::new(n_h, data, space, "binary")
}

pub fn to_csv(ts: &TrainingSet) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = match &ts.parameters {
        Some(params) => params
            .iter()
            .map(|mu| {
                let parts: Vec<String> = mu.iter().map(|v| format!("{v:e}")).collect();
                format!("({})", parts.join(" "))
            })
            .collect(),
        None => (0..ts.n_tr()).map(|j| format!("f{j}")).collect(),
    };
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..ts.n_h() {
        w.write_record(ts.columns().map(|c| format!("{:e}", c[i])))
            .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse(format!("csv: {e}"))
}

fn parse_tuple(field: &str) -> Result<Vec<f64>> {
    let inner = field
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::parse(format!("bad parameter tuple '{field}'")))?;
    inner.split_whitespace().map(parse_value).collect()
}

fn parse_value(t: &str) -> Result<f64> {
    let v: f64 = t
        .trim()
        .parse()
        .map_err(|_| Error::parse(format!("bad number '{t}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(format!("non-finite value '{t}'")));
    }
    Ok(v)
}

/// Parses CSV snapshots; the space is not stored in the file.
pub fn from_csv(bytes: &[u8], space: SpaceSpec) -> Result<TrainingSet> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = r.headers().map_err(csv_err)?.clone();
    let n_tr = header.len();
    if n_tr == 0 || (n_tr == 1 && header[0].is_empty()) {
        return Err(Error::parse("csv has no snapshot columns"));
    }
    let tuples = header.iter().all(|h| h.trim_start().starts_with('('));
    let parameters = if tuples {
        let params = header.iter().map(parse_tuple).collect::<Result<Vec<_>>>()?;
        if params.iter().any(|p| p.len() != params[0].len()) {
            return Err(Error::parse("parameter tuples differ in length"));
        }
        Some(params)
    } else {
        None
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != n_tr {
            return Err(Error::parse(format!(
                "row {} has {} fields, expected {n_tr}",
                rows.len() + 1,
                rec.len()
            )));
        }
        rows.push(rec.iter().map(parse_value).collect::<Result<_>>()?);
    }
    let n_h = rows.len();
    if n_h == 0 {
        return Err(Error::parse("csv has no data rows"));
    }
    let mut data = vec![0.0; n_h * n_tr];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            data[j * n_h + i] = *v;
        }
    }
    let mut ts = TrainingSet::new(n_h, data, space, "csv")?;
    ts.parameters = parameters;
    Ok(ts)
}

pub fn write_binary(ts: &TrainingSet, path: &Path) -> Result<()> {
    fs::File::create(path)?.write_all(&to_binary(ts))?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<TrainingSet> {
    from_binary(&fs::read(path)?)
}

pub fn write_csv(ts: &TrainingSet, path: &Path) -> Result<()> {
    fs::write(path, to_csv(ts)?)?;
    Ok(())
}

pub fn read_csv(path: &Path, space: SpaceSpec) -> Result<TrainingSet> {
    from_csv(&fs::read(path)?, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{sample_family, Family};

    #[test]
    fn binary_round_trip() {
        for s in [SpaceSpec::l1(), SpaceSpec::new(2.5).unwrap(), SpaceSpec::linf()] {
            let ts = crate::families::gen_random_set(2, 7, 3, 5, s).unwrap();
            let back = from_binary(&to_binary(&ts)).unwrap();
            assert_eq!(back.data(), ts.data());
            assert_eq!(back.space, s);
            assert_eq!(back.n_h(), 7);
        }
    }

    #[test]
    fn binary_rejects_bad_input() {
        let ts = crate::families::gen_random_set(2, 4, 2, 3, SpaceSpec::l1()).unwrap();
        let good = to_binary(&ts);
        assert!(from_binary(&good[..good.len() - 8]).is_err());
        let mut bad = good.clone();
        bad[0] ^= 1;
        assert!(from_binary(&bad).is_err());
        let mut huge = good.clone();
        huge[16..24].copy_from_slice(&1e18f64.to_le_bytes());
        assert!(from_binary(&huge).is_err());
        let mut nan = good;
        nan[64..72].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(from_binary(&nan).is_err());
    }

    #[test]
    fn csv_round_trip_with_parameters() {
        let grid = Family::TwoD.grid_with(&[3, 2], &[2, 2]);
        let ts = sample_family(Family::TwoD, &grid, SpaceSpec::l2()).unwrap();
        let bytes = to_csv(&ts).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("(1.0471975511965976e0 1.0471975511965976e0),"));
        let back = from_csv(&bytes, SpaceSpec::l2()).unwrap();
        assert_eq!(back.data(), ts.data());
        assert_eq!(back.parameters, ts.parameters);
    }

    #[test]
    fn csv_without_parameters() {
        let ts = TrainingSet::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.5]], SpaceSpec::l1(), "x").unwrap();
        let bytes = to_csv(&ts).unwrap();
        assert_eq!(String::from_utf8(bytes.clone()).unwrap(), "f0,f1\n1e0,3e0\n2e0,4.5e0\n");
        let back = from_csv(&bytes, SpaceSpec::l1()).unwrap();
        assert_eq!(back.data(), ts.data());
        assert!(back.parameters.is_none());
        assert!(from_csv(b"f0,f1\n1,2\n3\n", SpaceSpec::l1()).is_err());
        assert!(from_csv(b"f0\n", SpaceSpec::l1()).is_err());
        assert!(from_csv(b"f0\nnan\n", SpaceSpec::l1()).is_err());
    }
}
