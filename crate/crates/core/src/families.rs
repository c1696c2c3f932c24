//! Training-set generators: parametric families sampled on uniform grids,
//! random low-rank sets, noise injection and the ℓ1 counterexample set.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::TrainingSet;
use crate::error::{Error, Result};
use crate::rng::{self, Gaussian, STREAM_COEFFS, STREAM_NOISE, STREAM_SNAPSHOTS};
use crate::space::SpaceSpec;

/// `count` uniform points on `[min, max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Axis { min, max, count }
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.min;
        }
        if i + 1 == self.count {
            return self.max;
        }
        self.min + i as f64 * (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::domain(format!("{what}: count must be at least 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::domain(format!(
                "{what}: invalid interval [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Tensor grids over space and parameters. Flattened indices run over the
/// lowest dimension fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub spatial: Vec<Axis>,
    pub parametric: Vec<Axis>,
}

impl GridSpec {
    pub fn n_h(&self) -> usize {
        self.spatial.iter().map(|a| a.count).product()
    }

    pub fn n_tr(&self) -> usize {
        self.parametric.iter().map(|a| a.count).product()
    }

    pub fn spatial_point(&self, idx: usize) -> Vec<f64> {
        unflatten(&self.spatial, idx)
    }

    pub fn parameter_point(&self, idx: usize) -> Vec<f64> {
        unflatten(&self.parametric, idx)
    }

    /// Lebesgue measure of the spatial box.
    pub fn spatial_measure(&self) -> f64 {
        self.spatial.iter().map(|a| a.max - a.min).product()
    }

    pub fn validate(&self) -> Result<()> {
        for (d, a) in self.spatial.iter().enumerate() {
            a.validate(&format!("spatial[{d}]"))?;
        }
        for (d, a) in self.parametric.iter().enumerate() {
            a.validate(&format!("parametric[{d}]"))?;
        }
        Ok(())
    }
}

fn unflatten(axes: &[Axis], mut idx: usize) -> Vec<f64> {
    axes.iter()
        .map(|a| {
            let i = idx % a.count;
            idx /= a.count;
            a.point(i)
        })
        .collect()
}

/// The parametric test families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// One spatial variable on `[-2, 2]`, two parameters on `[0, 2]²`.
    #[serde(rename = "2param")]
    TwoParam,
    /// One spatial variable on `[-1, 1]`, one parameter on `[1, π]`.
    #[serde(rename = "1d")]
    OneD,
    /// [`Family::OneD`] plus a narrow parameter-dependent indicator.
    #[serde(rename = "1d_perturbed")]
    OneDPerturbed,
    /// Two spatial variables on `[0, 1]²`, parameters on `[π/3, 2π]²`.
    #[serde(rename = "2d")]
    TwoD,
    /// Three spatial variables and three parameters on `[0, 1]³`.
    #[serde(rename = "3d")]
    ThreeD,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::TwoParam,
        Family::OneD,
        Family::OneDPerturbed,
        Family::TwoD,
        Family::ThreeD,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::TwoParam => "2param",
            Family::OneD => "1d",
            Family::OneDPerturbed => "1d_perturbed",
            Family::TwoD => "2d",
            Family::ThreeD => "3d",
        }
    }

    pub fn spatial_domain(&self) -> Vec<(f64, f64)> {
        match self {
            Family::TwoParam => vec![(-2.0, 2.0)],
            Family::OneD | Family::OneDPerturbed => vec![(-1.0, 1.0)],
            Family::TwoD => vec![(0.0, 1.0); 2],
            Family::ThreeD => vec![(0.0, 1.0); 3],
        }
    }

    pub fn parameter_domain(&self) -> Vec<(f64, f64)> {
        match self {
            Family::TwoParam => vec![(0.0, 2.0); 2],
            Family::OneD | Family::OneDPerturbed => vec![(1.0, PI)],
            Family::TwoD => vec![(PI / 3.0, 2.0 * PI); 2],
            Family::ThreeD => vec![(0.0, 1.0); 3],
        }
    }

    /// The full-scale sampling grids of the reference experiments.
    pub fn default_grid(&self) -> GridSpec {
        match self {
            Family::TwoParam => self.grid_with(&[100_000], &[32, 32]),
            Family::OneD | Family::OneDPerturbed => self.grid_with(&[100_000], &[500]),
            Family::TwoD => self.grid_with(&[300, 300], &[25, 25]),
            Family::ThreeD => self.grid_with(&[50, 50, 50], &[8, 8, 8]),
        }
    }

    /// Grid covering the whole domain with the given point counts.
    pub fn grid_with(&self, spatial: &[usize], parametric: &[usize]) -> GridSpec {
        let axes = |dom: Vec<(f64, f64)>, counts: &[usize]| {
            dom.into_iter()
                .zip(counts)
                .map(|((a, b), &c)| Axis::new(a, b, c))
                .collect()
        };
        GridSpec {
            spatial: axes(self.spatial_domain(), spatial),
            parametric: axes(self.parameter_domain(), parametric),
        }
    }

    /// Checked pointwise evaluation.
    pub fn eval(&self, x: &[f64], mu: &[f64]) -> Result<f64> {
        check_box("x", x, &self.spatial_domain())?;
        check_box("mu", mu, &self.parameter_domain())?;
        Ok(self.eval_unchecked(x, mu))
    }

    fn eval_unchecked(&self, x: &[f64], mu: &[f64]) -> f64 {
        match self {
            Family::TwoParam => {
                let (x, m1, m2) = (x[0], mu[0], mu[1]);
                (x + 2.0 * m1 + 3.0 * m2).exp()
                    * ((2.0 * PI * m1.exp() * x).sin().asin() * (-PI * (x - m1 / 2.0).abs()).exp()
                        + ((PI - m2).exp() * x).sin().asin() * (-PI * (x + m2 / 2.0).abs()).exp())
            }
            Family::OneD => one_d(x[0], mu[0]),
            Family::OneDPerturbed => one_d(x[0], mu[0]) + indicator(x[0], mu[0]),
            Family::TwoD => {
                let (x1, x2, m1, m2) = (x[0], x[1], mu[0], mu[1]);
                (x1 * m1).sin() * (x2 * m2).cos() * (x1.abs() * m1 + x2.abs() * m2).exp()
            }
            Family::ThreeD => {
                (1.0 - x[0])
                    * (1.0 - x[1])
                    * (1.0 - x[2])
                    * (PI * (x[0] * mu[0] + x[1] * mu[1] + x[2] * mu[2])).sin()
                    * ((x[0] + mu[0]) * (x[1] + mu[1]) * (x[2] + mu[2])).exp()
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::parse(format!("unknown family '{s}'")))
    }
}

fn one_d(x: f64, mu: f64) -> f64 {
    (1.0 - x) * (3.0 * PI * mu * (x + 1.0)).cos() * (-mu * (1.0 + x)).exp()
}

/// `1` on the open interval `((μ − 1)/1000, μ/1000)`, else `0`.
fn indicator(x: f64, mu: f64) -> f64 {
    if (mu - 1.0) / 1000.0 < x && x < mu / 1000.0 {
        1.0
    } else {
        0.0
    }
}

fn check_box(what: &str, v: &[f64], dom: &[(f64, f64)]) -> Result<()> {
    if v.len() != dom.len() {
        return Err(Error::domain(format!(
            "{what} has {} components, expected {}",
            v.len(),
            dom.len()
        )));
    }
    for (k, (&vi, &(a, b))) in v.iter().zip(dom).enumerate() {
        if !(a <= vi && vi <= b) {
            return Err(Error::domain(format!("{what}[{k}] = {vi} outside [{a}, {b}]")));
        }
    }
    Ok(())
}

pub fn family_2param(x: f64, mu1: f64, mu2: f64) -> Result<f64> {
    Family::TwoParam.eval(&[x], &[mu1, mu2])
}

pub fn family_1d(x: f64, mu: f64) -> Result<f64> {
    Family::OneD.eval(&[x], &[mu])
}

pub fn family_1d_perturbed(x: f64, mu: f64) -> Result<f64> {
    Family::OneDPerturbed.eval(&[x], &[mu])
}

pub fn family_2d(x1: f64, x2: f64, mu1: f64, mu2: f64) -> Result<f64> {
    Family::TwoD.eval(&[x1, x2], &[mu1, mu2])
}

pub fn family_3d(x: [f64; 3], mu: [f64; 3]) -> Result<f64> {
    Family::ThreeD.eval(&x, &mu)
}

/// Samples `family` on `grid`: column `j` is the snapshot at parameter
/// point `j`, coordinate `i` its value at spatial point `i`.
pub fn sample_family(family: Family, grid: &GridSpec, space: SpaceSpec) -> Result<TrainingSet> {
    grid.validate()?;
    let (sd, pd) = (family.spatial_domain(), family.parameter_domain());
    if grid.spatial.len() != sd.len() || grid.parametric.len() != pd.len() {
        return Err(Error::domain(format!(
            "family {family} needs {} spatial and {} parametric axes",
            sd.len(),
            pd.len()
        )));
    }
    for (k, (a, &(lo, hi))) in grid.spatial.iter().zip(&sd).enumerate() {
        if a.min < lo || a.max > hi {
            return Err(Error::domain(format!(
                "spatial axis {k} [{}, {}] leaves the domain [{lo}, {hi}]",
                a.min, a.max
            )));
        }
    }
    for (k, (a, &(lo, hi))) in grid.parametric.iter().zip(&pd).enumerate() {
        if a.min < lo || a.max > hi {
            return Err(Error::domain(format!(
                "parametric axis {k} [{}, {}] leaves the domain [{lo}, {hi}]",
                a.min, a.max
            )));
        }
    }
    let (n_h, n_tr) = (grid.n_h(), grid.n_tr());
    let xs: Vec<Vec<f64>> = (0..n_h).map(|i| grid.spatial_point(i)).collect();
    let params: Vec<Vec<f64>> = (0..n_tr).map(|j| grid.parameter_point(j)).collect();
    let mut data = vec![0.0; n_h * n_tr];
    data.par_chunks_mut(n_h).zip(params.par_iter()).for_each(|(col, mu)| {
        for (v, x) in col.iter_mut().zip(&xs) {
            *v = family.eval_unchecked(x, mu);
        }
    });
    let mut ts = TrainingSet::new(n_h, data, space, family.name())?;
    ts.grid = Some(grid.clone());
    ts.parameters = Some(params);
    Ok(ts)
}

/// `F = H C` with `H` an `n_h × d` standard Gaussian matrix and `C` a
/// `d × n_tr` matrix of `U(−1, 1)` weights.
pub fn gen_random_set(seed: u64, n_h: usize, d: usize, n_tr: usize, space: SpaceSpec) -> Result<TrainingSet> {
    if n_h == 0 || d == 0 || n_tr == 0 {
        return Err(Error::domain("random set dimensions must be positive"));
    }
    if d > n_h {
        return Err(Error::domain(format!("d = {d} exceeds N_h = {n_h}")));
    }
    let mut gauss = Gaussian::new(rng::stream(seed, STREAM_SNAPSHOTS));
    let h = DMatrix::from_fn(n_h, d, |_, _| gauss.sample());
    let mut coeff_rng = rng::stream(seed, STREAM_COEFFS);
    let c = DMatrix::from_fn(d, n_tr, |_, _| coeff_rng.random_range(-1.0..1.0));
    let f = h * c;
    TrainingSet::new(n_h, f.as_slice().to_vec(), space, format!("random(seed={seed})"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Adds the indicator of `((μ − 1)/1000, μ/1000)` to each snapshot of a
    /// one-dimensional family.
    IndicatorShift,
    /// Perturbs a random fraction of all coordinates.
    CoordinateFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeRef {
    /// Mean of all `|coordinates|`.
    Avg,
    /// Maximum of all `|coordinates|`.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCombine {
    /// The drawn value is added to the coordinate.
    Add,
    /// The drawn value replaces the coordinate.
    Replace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    #[serde(default)]
    pub fraction: f64,
    #[serde(default = "default_magnitude")]
    pub magnitude_ref: MagnitudeRef,
    #[serde(default = "default_combine")]
    pub combine: NoiseCombine,
    /// Defaults to the experiment seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_magnitude() -> MagnitudeRef {
    MagnitudeRef::Avg
}

fn default_combine() -> NoiseCombine {
    NoiseCombine::Add
}

impl NoiseSpec {
    pub fn coordinate_fraction(fraction: f64, magnitude_ref: MagnitudeRef, seed: u64) -> Self {
        NoiseSpec {
            mode: NoiseMode::CoordinateFraction,
            fraction,
            magnitude_ref,
            combine: NoiseCombine::Add,
            seed: Some(seed),
        }
    }

    /// Number of coordinates changed in an `n_h × n_tr` set.
    pub fn count(&self, n_h: usize, n_tr: usize) -> usize {
        (self.fraction * n_h as f64 * n_tr as f64).floor() as usize
    }
}

pub fn add_noise(ts: &TrainingSet, spec: &NoiseSpec) -> Result<TrainingSet> {
    let mut out = ts.clone();
    match spec.mode {
        NoiseMode::CoordinateFraction => {
            if !(0.0..=1.0).contains(&spec.fraction) {
                return Err(Error::domain(format!(
                    "noise fraction must lie in [0, 1], got {}",
                    spec.fraction
                )));
            }
            let total = ts.data().len();
            let count = spec.count(ts.n_h(), ts.n_tr());
            if spec.fraction > 0.0 && count == 0 {
                return Err(Error::domain(format!(
                    "noise fraction {} selects no coordinate of a {} x {} set",
                    spec.fraction,
                    ts.n_h(),
                    ts.n_tr()
                )));
            }
            if count == 0 {
                return Ok(out);
            }
            let reference = match spec.magnitude_ref {
                MagnitudeRef::Avg => ts.data().iter().map(|v| v.abs()).sum::<f64>() / total as f64,
                MagnitudeRef::Max => ts.data().iter().fold(0.0f64, |m, v| m.max(v.abs())),
            };
            let mut rng = rng::stream(spec.seed.unwrap_or(0), STREAM_NOISE);
            let picks = rand::seq::index::sample(&mut rng, total, count);
            let data = out.data_mut();
            for idx in picks.iter() {
                let v = rng.random_range(0.0..=reference);
                match spec.combine {
                    NoiseCombine::Add => data[idx] += v,
                    NoiseCombine::Replace => data[idx] = v,
                }
            }
        }
        NoiseMode::IndicatorShift => {
            let grid = ts
                .grid
                .as_ref()
                .filter(|g| g.spatial.len() == 1 && g.parametric.len() == 1)
                .ok_or_else(|| Error::domain("indicator noise needs a one-dimensional family grid"))?;
            let xs = grid.spatial[0].points();
            let mus = grid.parametric[0].points();
            let n_h = ts.n_h();
            for (col, mu) in out.data_mut().chunks_mut(n_h).zip(mus) {
                for (v, &x) in col.iter_mut().zip(&xs) {
                    *v += indicator(x, mu);
                }
            }
        }
    }
    out.label = format!("{}+noise", ts.label);
    Ok(out)
}

/// The ℓ1 set on which natural greedy residuals grow geometrically.
#[derive(Debug, Clone)]
pub struct Counterexample {
    /// Column 0 is `α f_*`, column `n + 1` is `a_n f_n`.
    pub set: TrainingSet,
    pub eps: f64,
    pub alpha: f64,
    pub a: Vec<f64>,
    /// `M(α) = min{n ≥ 1 : α ≥ a_n / (2(1 − ε))^n}` within the truncation.
    pub threshold: Option<usize>,
}

/// Default weights `a_n = 2^{-n/4}`.
pub fn counterexample_default_a(len: usize) -> Vec<f64> {
    (0..len).map(|n| 2f64.powf(-(n as f64) / 4.0)).collect()
}

fn threshold_value(eps: f64, a: &[f64], n: usize) -> f64 {
    a[n] / (2.0 * (1.0 - eps)).powi(n as i32)
}

/// An `α` with `M(α) = target`, the geometric mean of the neighbouring
/// thresholds.
pub fn counterexample_alpha(eps: f64, a: &[f64], target: usize) -> Result<f64> {
    check_eps(eps)?;
    if target == 0 || target >= a.len() {
        return Err(Error::domain(format!(
            "target threshold {target} needs 1 <= target < {}",
            a.len()
        )));
    }
    Ok((threshold_value(eps, a, target - 1) * threshold_value(eps, a, target)).sqrt())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    Ok(())
}

/// `{α f_*, a_0 f_0, …, a_{size−1} f_{size−1}}` in `ℓ1^{size+1}` with
/// `f_* = e_0` and
/// `f_n = −ε/2^n e_0 − Σ_{k=1}^{n} ε/2^{n+1−k} e_k + (1 − ε) e_{n+1}`.
pub fn counterexample_set(eps: f64, a: &[f64], alpha: f64, size: usize) -> Result<Counterexample> {
    check_eps(eps)?;
    if size == 0 || a.len() < size {
        return Err(Error::domain(format!(
            "need at least size = {size} >= 1 weights, got {}",
            a.len()
        )));
    }
    if a.iter().any(|&v| !(v > 0.0 && v.is_finite())) || a.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::domain("weights must be positive and non-increasing"));
    }
    if !(alpha > 0.0 && alpha < a[0]) {
        return Err(Error::domain(format!(
            "alpha must lie in (0, a_0 = {}), got {alpha}",
            a[0]
        )));
    }
    let dim = size + 1;
    let mut columns = Vec::with_capacity(dim);
    let mut star = vec![0.0; dim];
    star[0] = alpha;
    columns.push(star);
    for (n, &an) in a.iter().enumerate().take(size) {
        let mut f = vec![0.0; dim];
        f[0] = -eps / 2f64.powi(n as i32);
        for (k, v) in f.iter_mut().enumerate().take(n + 1).skip(1) {
            *v = -eps / 2f64.powi((n + 1 - k) as i32);
        }
        f[n + 1] = 1.0 - eps;
        columns.push(f.into_iter().map(|v| an * v).collect());
    }
    let threshold = (1..size).find(|&n| alpha >= threshold_value(eps, a, n));
    let set = TrainingSet::from_columns(columns, SpaceSpec::l1(), format!("counterexample(eps={eps})"))?;
    Ok(Counterexample {
        set,
        eps,
        alpha,
        a: a.to_vec(),
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_examples() {
        assert_eq!(family_2param(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(family_2param(0.0, 1.3, 0.4).unwrap(), 0.0);
        assert_eq!(family_1d(1.0, 2.2).unwrap(), 0.0);
        assert!((family_1d(-1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(
            family_1d_perturbed(0.0015, 2.0).unwrap(),
            family_1d(0.0015, 2.0).unwrap() + 1.0
        );
        assert_eq!(
            family_1d_perturbed(0.0025, 2.0).unwrap(),
            family_1d(0.0025, 2.0).unwrap()
        );
        assert_eq!(family_2d(0.0, 0.7, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(family_3d([0.2, 1.0, 0.3], [0.5, 0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(family_3d([0.0; 3], [0.1, 0.9, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn out_of_domain() {
        assert!(family_1d(1.5, 2.0).is_err());
        assert!(family_1d(0.0, 0.5).is_err());
        assert!(family_2d(0.5, 0.5, 0.1, 2.0).is_err());
        let mut grid = Family::OneD.grid_with(&[10], &[5]);
        grid.spatial[0].max = 3.0;
        assert!(sample_family(Family::OneD, &grid, SpaceSpec::l1()).is_err());
    }

    #[test]
    fn axis_points_include_endpoints() {
        let a = Axis::new(1.0, std::f64::consts::PI, 7);
        let p = a.points();
        assert_eq!(p[0], 1.0);
        assert_eq!(p[6], std::f64::consts::PI);
        assert_eq!(Axis::new(0.5, 0.5, 1).points(), vec![0.5]);
    }

    #[test]
    fn flattening_lowest_dimension_fastest() {
        let grid = Family::TwoD.grid_with(&[4, 3], &[2, 5]);
        let ts = sample_family(Family::TwoD, &grid, SpaceSpec::l1()).unwrap();
        for j in [0, 3, 9] {
            let mu = grid.parameter_point(j);
            for i in [0, 1, 5, 11] {
                let x = grid.spatial_point(i);
                assert_eq!(ts.column(j)[i], family_2d(x[0], x[1], mu[0], mu[1]).unwrap());
            }
        }
        assert_eq!(grid.spatial_point(1), vec![1.0 / 3.0, 0.0]);
        assert_eq!(grid.spatial_point(4), vec![0.0, 0.5]);
    }

    #[test]
    fn random_set_is_deterministic() {
        let a = gen_random_set(11, 20, 4, 9, SpaceSpec::l2()).unwrap();
        let b = gen_random_set(11, 20, 4, 9, SpaceSpec::l2()).unwrap();
        let c = gen_random_set(12, 20, 4, 9, SpaceSpec::l2()).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data()[0], c.data()[0]);
        assert!(gen_random_set(1, 3, 4, 2, SpaceSpec::l2()).is_err());
    }

    #[test]
    fn noise_counts_and_ranges() {
        let ts = gen_random_set(1, 50, 5, 40, SpaceSpec::l1()).unwrap();
        let zero = add_noise(&ts, &NoiseSpec::coordinate_fraction(0.0, MagnitudeRef::Avg, 3)).unwrap();
        assert_eq!(zero.data(), ts.data());
        for combine in [NoiseCombine::Add, NoiseCombine::Replace] {
            let spec = NoiseSpec {
                combine,
                ..NoiseSpec::coordinate_fraction(0.01, MagnitudeRef::Max, 3)
            };
            let noisy = add_noise(&ts, &spec).unwrap();
            let changed = noisy.data().iter().zip(ts.data()).filter(|(a, b)| a != b).count();
            assert_eq!(changed, 20);
        }
        assert!(add_noise(&ts, &NoiseSpec::coordinate_fraction(1.5, MagnitudeRef::Avg, 3)).is_err());
        assert!(add_noise(&ts, &NoiseSpec::coordinate_fraction(1e-6, MagnitudeRef::Avg, 3)).is_err());
    }

    #[test]
    fn indicator_noise_reproduces_the_perturbed_family() {
        let grid = Family::OneD.grid_with(&[4001], &[7]);
        let plain = sample_family(Family::OneD, &grid, SpaceSpec::l1()).unwrap();
        let spec = NoiseSpec {
            mode: NoiseMode::IndicatorShift,
            fraction: 0.0,
            magnitude_ref: MagnitudeRef::Avg,
            combine: NoiseCombine::Add,
            seed: None,
        };
        let shifted = add_noise(&plain, &spec).unwrap();
        let perturbed = sample_family(Family::OneDPerturbed, &grid, SpaceSpec::l1()).unwrap();
        assert_eq!(shifted.data(), perturbed.data());
        assert_ne!(plain.data(), perturbed.data());
    }

    #[test]
    fn counterexample_vectors_have_unit_norm() {
        let a = vec![1.0; 10];
        let ce = counterexample_set(0.25, &a, 0.5, 10).unwrap();
        for n in 1..=10 {
            let norm: f64 = ce.set.column(n).iter().map(|v| v.abs()).sum();
            assert!((norm - 1.0).abs() < 1e-15);
        }
        assert!(counterexample_set(0.6, &a, 0.5, 10).is_err());
        assert!(counterexample_set(0.25, &a, 1.5, 10).is_err());
    }

    #[test]
    fn counterexample_threshold_hits_target() {
        let a = counterexample_default_a(12);
        let alpha = counterexample_alpha(0.25, &a, 8).unwrap();
        let ce = counterexample_set(0.25, &a, alpha, 12).unwrap();
        assert_eq!(ce.threshold, Some(8));
    }
}
