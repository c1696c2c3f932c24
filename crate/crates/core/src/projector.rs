//! The projector stack behind the natural greedy algorithm.
//!
//! For a normalized sequence `g_0, g_1, …` the one-step remainders are
//! `r_k(f) = f - F_{g_k}(f) g_k` and `R_n = r_{n-1} ∘ … ∘ r_0` (with
//! `R_0 = id`). When the `g_k` are built by the natural greedy algorithm they
//! are semi-orthogonal (`F_{g_k}(g_m) = 0` for `m > k`), which makes `R_n` a
//! linear projector with kernel `span{g_0, …, g_{n-1}}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::TrainingSet;
use crate::error::{Error, Result};
use crate::space::{NormingFunctional, SpaceSpec};

/// Which constructor produced a basis. Only natural-greedy and EIM bases are
/// semi-orthogonal in the forward sense required by [`apply_r`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Nga,
    Oga,
    Eim,
    Pod,
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Nga => "nga",
            BasisKind::Oga => "oga",
            BasisKind::Eim => "eim",
            BasisKind::Pod => "pod",
        }
    }
}

/// Ordered normalized basis vectors together with the bookkeeping of the
/// run that produced them.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    space: SpaceSpec,
    kind: BasisKind,
    dim: usize,
    vectors: Vec<Vec<f64>>,
    functionals: Vec<NormingFunctional>,
    /// Training indices of the selected snapshots (empty for POD).
    pub selected: Vec<usize>,
    /// Per-iteration score (`τ_n`, `σ_n`, or a singular value for POD).
    pub scores: Vec<f64>,
    /// Interpolation coordinates `z_k` (EIM, and NGA in ℓ∞).
    pub points: Option<Vec<usize>>,
    /// Column `n` holds the coordinates of snapshot `f_n` in `g_0..g_n`.
    snapshot_factor: Vec<Vec<f64>>,
}

impl ReducedBasis {
    pub fn new(space: SpaceSpec, dim: usize, kind: BasisKind) -> Self {
        ReducedBasis {
            space,
            kind,
            dim,
            vectors: Vec::new(),
            functionals: Vec::new(),
            selected: Vec::new(),
            scores: Vec::new(),
            points: None,
            snapshot_factor: Vec::new(),
        }
    }

    /// Appends a basis vector together with its norming functional.
    pub fn push(&mut self, g: Vec<f64>) -> Result<()> {
        if g.len() != self.dim {
            return Err(Error::domain(format!(
                "basis vector has length {}, expected {}",
                g.len(),
                self.dim
            )));
        }
        let functional = self.space.norming_functional(&g)?;
        self.vectors.push(g);
        self.functionals.push(functional);
        Ok(())
    }

    pub(crate) fn push_snapshot_column(&mut self, column: Vec<f64>) {
        self.snapshot_factor.push(column);
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn functional(&self, k: usize) -> &NormingFunctional {
        &self.functionals[k]
    }

    pub fn truncate(&mut self, n: usize) {
        self.vectors.truncate(n);
        self.functionals.truncate(n);
        self.selected.truncate(n);
        self.scores.truncate(n);
        self.snapshot_factor.truncate(n);
        if let Some(p) = self.points.as_mut() {
            p.truncate(n);
        }
    }

    /// Converts coefficients against `g_0..g_{n-1}` into coefficients
    /// against the selected snapshots `f_0..f_{n-1}` (upper-triangular solve).
    pub fn snapshot_coefficients(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        let n = alpha.len();
        if n > self.snapshot_factor.len() {
            return Err(Error::range(format!(
                "no snapshot factor for {n} coefficients (have {})",
                self.snapshot_factor.len()
            )));
        }
        // alpha = U beta, U[k][j] = snapshot_factor[j][k], upper triangular
        let mut beta = vec![0.0; n];
        for j in (0..n).rev() {
            let mut s = alpha[j];
            for (jj, b) in beta.iter().enumerate().skip(j + 1) {
                s -= self.snapshot_factor[jj][j] * b;
            }
            let diag = self.snapshot_factor[j][j];
            if diag == 0.0 {
                return Err(Error::domain("singular snapshot factor"));
            }
            beta[j] = s / diag;
        }
        Ok(beta)
    }
}

/// `(r - F_g(r) g, F_g(r))`.
pub fn residual_step(r: &[f64], g: &[f64], space: SpaceSpec) -> Result<(Vec<f64>, f64)> {
    if r.len() != g.len() {
        return Err(Error::domain("dimension mismatch in residual step"));
    }
    let functional = space.norming_functional(g)?;
    let mut out = r.to_vec();
    let c = step_in_place(&mut out, g, &functional);
    Ok((out, c))
}

#[inline]
pub(crate) fn step_in_place(r: &mut [f64], g: &[f64], functional: &NormingFunctional) -> f64 {
    let c = functional.apply(r);
    if c != 0.0 {
        for (ri, gi) in r.iter_mut().zip(g) {
            *ri -= c * gi;
        }
    }
    c
}

/// `R_n(f)`.
pub fn apply_r(f: &[f64], basis: &ReducedBasis, n: usize) -> Result<Vec<f64>> {
    apply_r_with_coeffs(f, basis, n).map(|(r, _)| r)
}

fn apply_r_with_coeffs(f: &[f64], basis: &ReducedBasis, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n > basis.len() {
        return Err(Error::range(format!(
            "R_{n} requested but the basis has {} vectors",
            basis.len()
        )));
    }
    if f.len() != basis.dim() {
        return Err(Error::domain(format!(
            "vector has length {}, basis dimension is {}",
            f.len(),
            basis.dim()
        )));
    }
    let mut r = f.to_vec();
    let coeffs = (0..n)
        .map(|k| step_in_place(&mut r, basis.vector(k), basis.functional(k)))
        .collect();
    Ok((r, coeffs))
}

/// `(f - R_n(f), α)` with `f - R_n(f) = Σ α_k g_k` over the whole basis.
pub fn reconstruct(f: &[f64], basis: &ReducedBasis) -> Result<(Vec<f64>, Vec<f64>)> {
    if basis.is_empty() {
        return Err(Error::domain("cannot reconstruct from an empty basis"));
    }
    let (r, coeffs) = apply_r_with_coeffs(f, basis, basis.len())?;
    let approx = f.iter().zip(&r).map(|(a, b)| a - b).collect();
    Ok((approx, coeffs))
}

/// Per-element residuals `R_n(f)` and accumulated coefficients, advanced
/// one basis vector at a time.
#[derive(Debug, Clone)]
pub struct ResidualCache {
    dim: usize,
    residuals: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    norms: Vec<f64>,
    space: SpaceSpec,
    n: usize,
}

impl ResidualCache {
    pub fn new(ts: &TrainingSet) -> Self {
        let space = ts.space;
        let dim = ts.n_h();
        let residuals = ts.data().to_vec();
        let norms = residuals.par_chunks(dim).map(|c| space.norm(c)).collect();
        ResidualCache {
            dim,
            residuals,
            coeffs: vec![Vec::new(); ts.n_tr()],
            norms,
            space,
            n: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.n
    }

    pub fn residual(&self, i: usize) -> &[f64] {
        &self.residuals[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coeffs(&self, i: usize) -> &[f64] {
        &self.coeffs[i]
    }

    /// `‖R_n(f_i)‖` for every element.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Advances every residual by one step with `g_new`.
    pub fn update(&mut self, g_new: &[f64]) -> Result<()> {
        if g_new.len() != self.dim {
            return Err(Error::domain(format!(
                "basis vector has length {}, cache dimension is {}",
                g_new.len(),
                self.dim
            )));
        }
        let functional = self.space.norming_functional(g_new)?;
        let space = self.space;
        self.residuals
            .par_chunks_mut(self.dim)
            .zip(self.coeffs.par_iter_mut())
            .zip(self.norms.par_iter_mut())
            .for_each(|((r, coeffs), norm)| {
                let c = step_in_place(r, g_new, &functional);
                coeffs.push(c);
                *norm = space.norm(r);
            });
        self.n += 1;
        Ok(())
    }
}

/// Functional-style wrapper around [`ResidualCache::update`].
pub fn update_cache(mut cache: ResidualCache, g_new: &[f64]) -> Result<ResidualCache> {
    cache.update(g_new)?;
    Ok(cache)
}
