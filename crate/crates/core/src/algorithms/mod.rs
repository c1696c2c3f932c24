//! Reduced-basis constructors: NGA, OGA, EIM and POD.

mod eim;
mod nga;
mod oga;
mod pod;

use serde::{Deserialize, Serialize};

pub use eim::{interpolation_coefficients, run_eim};
pub use nga::run_nga;
pub use oga::run_oga;
pub use pod::{run_pod, run_pod_with_budget, PodMethod, DEFAULT_POD_BUDGET};

use crate::error::{Error, Result};
use crate::families::GridSpec;
use crate::space::SpaceSpec;

/// `N_tr` snapshots of length `N_h`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub space: SpaceSpec,
    pub label: String,
    n_h: usize,
    data: Vec<f64>,
    /// The sampling grid, when the set comes from a parametric family.
    pub grid: Option<GridSpec>,
    /// One parameter tuple per snapshot.
    pub parameters: Option<Vec<Vec<f64>>>,
}

impl TrainingSet {
    /// Wraps a column-major `n_h × (data.len() / n_h)` matrix.
    pub fn new(n_h: usize, data: Vec<f64>, space: SpaceSpec, label: impl Into<String>) -> Result<Self> {
        if n_h == 0 || data.is_empty() {
            return Err(Error::domain("a training set needs at least one non-empty snapshot"));
        }
        if !data.len().is_multiple_of(n_h) {
            return Err(Error::domain(format!(
                "{} values do not form columns of length {n_h}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite value in snapshot {} at coordinate {}",
                i / n_h,
                i % n_h
            )));
        }
        Ok(TrainingSet {
            space,
            label: label.into(),
            n_h,
            data,
            grid: None,
            parameters: None,
        })
    }

    pub fn from_columns(columns: Vec<Vec<f64>>, space: SpaceSpec, label: impl Into<String>) -> Result<Self> {
        let n_h = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().position(|c| c.len() != n_h) {
            return Err(Error::domain(format!(
                "snapshot {c} has length {}, expected {n_h}",
                columns[c].len()
            )));
        }
        TrainingSet::new(n_h, columns.concat(), space, label)
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_tr(&self) -> usize {
        self.data.len() / self.n_h
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_h..(i + 1) * self.n_h]
    }

    pub fn columns(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.n_h)
    }

    /// The same snapshots viewed in another ℓp space.
    pub fn with_space(&self, space: SpaceSpec) -> TrainingSet {
        TrainingSet { space, ..self.clone() }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Parameters shared by the greedy constructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreedyConfig {
    /// `M`, the largest basis size.
    pub max_iterations: usize,
    /// `γ`; the first element scoring at least `γ · max` is selected.
    pub weakness: f64,
    /// Stop once the best score falls to `stop_rel · τ_0`.
    pub stop_rel: f64,
    /// Relative tolerance of the OGA's inner distance problems.
    pub oga_tol: f64,
    pub seed: u64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            max_iterations: 30,
            weakness: 1.0,
            stop_rel: 1e-13,
            oga_tol: 1e-9,
            seed: 0,
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.weakness > 0.0 && self.weakness <= 1.0) {
            return Err(Error::domain(format!(
                "weakness must lie in (0, 1], got {}",
                self.weakness
            )));
        }
        if !(self.stop_rel > 0.0) || !(self.oga_tol > 0.0) {
            return Err(Error::domain("tolerances must be positive"));
        }
        Ok(())
    }
}

/// One constructor iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    /// Basis size after this iteration.
    pub iteration: usize,
    /// Training index that entered the basis (`None` for POD).
    pub selected: Option<usize>,
    /// `τ_n` (NGA), `σ_n` (OGA), the interpolation error (EIM) or the
    /// singular value (POD) attached to this iteration.
    pub score: f64,
    /// Cumulative process CPU time since the constructor started.
    pub cputime_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    /// Free-form remarks such as early exhaustion or POD truncation.
    pub notes: Vec<String>,
}

impl Trace {
    pub fn selected(&self) -> Vec<usize> {
        self.records.iter().filter_map(|r| r.selected).collect()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.score).collect()
    }

    /// CPU time after `m` iterations (zero for `m = 0`).
    pub fn cputime_at(&self, m: usize) -> Option<f64> {
        if m == 0 {
            return Some(0.0);
        }
        self.records.get(m - 1).map(|r| r.cputime_s)
    }
}

/// Greedy choice over `scores`: returns `(index, max)` where `index` is the
/// first non-excluded position scoring at least `weakness · max`.
pub(crate) fn select(scores: &[f64], excluded: &[bool], weakness: f64) -> Option<(usize, f64)> {
    let max = scores
        .iter()
        .zip(excluded)
        .filter(|(_, &ex)| !ex)
        .map(|(&s, _)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let threshold = weakness * max;
    scores
        .iter()
        .zip(excluded)
        .position(|(&s, &ex)| !ex && s >= threshold)
        .map(|i| (i, max))
}

pub(crate) fn check_nonempty(ts: &TrainingSet) -> Result<()> {
    if ts.n_tr() == 0 || ts.n_h() == 0 {
        return Err(Error::domain("empty training set"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_prefers_lowest_index_among_ties() {
        assert_eq!(select(&[1.0, 3.0, 3.0], &[false; 3], 1.0), Some((1, 3.0)));
        assert_eq!(select(&[1.0, 3.0, 3.0], &[false, true, false], 1.0), Some((2, 3.0)));
        assert_eq!(select(&[2.0, 3.0], &[false; 2], 0.5), Some((0, 3.0)));
        assert_eq!(select(&[2.0], &[true], 1.0), None);
    }

    #[test]
    fn training_set_shape_checks() {
        assert!(TrainingSet::new(2, vec![1.0; 3], SpaceSpec::l2(), "x").is_err());
        assert!(TrainingSet::new(2, vec![1.0, f64::NAN], SpaceSpec::l2(), "x").is_err());
        assert!(TrainingSet::from_columns(vec![vec![1.0], vec![1.0, 2.0]], SpaceSpec::l2(), "x").is_err());
        let ts = TrainingSet::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0]], SpaceSpec::l2(), "x").unwrap();
        assert_eq!((ts.n_h(), ts.n_tr()), (2, 2));
        assert_eq!(ts.column(1), &[3.0, 4.0]);
    }

    #[test]
    fn config_validation() {
        assert!(GreedyConfig::default().validate().is_ok());
        let bad = GreedyConfig {
            weakness: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
