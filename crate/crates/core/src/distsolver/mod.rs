//! Best approximation from a subspace, `dist_p(f, V) = min_α ‖f − Σ α_k v_k‖_p`,
//! and operator-norm estimation on constructed subspaces.
//!
//! Every solve starts from the ℓ2 least-squares coefficients (thin QR).
//! `p = 2` stops there. `1 < p < ∞` refines with L-BFGS on the norm. `p = 1`
//! runs an exact vertex-exchange method for least absolute deviations and
//! `p = ∞` an exact active-set simplex on the Chebyshev linear program; both
//! work on the `N_h × n` constraint set implicitly, so they stay usable at
//! `N_h = 10^5`. A small dense tableau simplex is kept as an independent
//! oracle.

mod chebyshev;
mod lad;
mod lbfgs;
mod opnorm;
mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use opnorm::{basis_constant, max_operator_norm, operator_norm, OpNormOptions, OpNormResult};
pub use simplex::{distance_oracle_lp, ORACLE_MAX_DIM, ORACLE_MAX_N};

use crate::error::{Error, Result};
use crate::space::{Exponent, SpaceSpec};

/// How a distance computation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// The iteration cap was hit; `dist` is the best value found, an upper
    /// bound on the true distance.
    MaxIter,
    /// Solved by the dense simplex oracle.
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistResult {
    pub dist: f64,
    pub coeffs: Vec<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Objective value after each iteration (non-increasing).
    pub objective: Vec<f64>,
}

/// Iteration cap of the quasi-Newton refinement.
pub const LBFGS_MAX_ITER: usize = 500;

/// Row-major `rows × cols` matrix; row `i` holds coordinate `i` of every
/// basis vector.
#[derive(Debug, Clone)]
pub(crate) struct RowMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RowMatrix {
    pub fn from_columns(columns: &[&[f64]], rows: usize) -> Self {
        let cols = columns.len();
        let mut data = vec![0.0; rows * cols];
        for (k, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                data[i * cols + k] = *v;
            }
        }
        RowMatrix { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `f - G α`.
    pub fn residual(&self, f: &[f64], alpha: &[f64]) -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(i, fi)| fi - dot(self.row(i), alpha))
            .collect()
    }

    /// `G d`.
    pub fn mul(&self, d: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), d)).collect()
    }

    /// `Gᵀ w`.
    pub fn tmul(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, wi) in w.iter().enumerate() {
            if *wi != 0.0 {
                for (o, g) in out.iter_mut().zip(self.row(i)) {
                    *o += wi * g;
                }
            }
        }
        out
    }

    /// The square submatrix made of the given rows.
    pub fn rows_matrix(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), self.cols, |r, c| self.row(rows[r])[c])
    }
}

/// Dot product with four interleaved accumulators (vectorizes).
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// A subspace prepared for repeated distance queries.
#[derive(Debug, Clone)]
pub struct DistanceSolver {
    space: SpaceSpec,
    tol: f64,
    n_h: usize,
    g: RowMatrix,
    /// Thin QR factors of the basis matrix, for the least-squares start.
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl DistanceSolver {
    /// Factorizes the basis; fails with a domain error when the vectors are
    /// numerically linearly dependent.
    pub fn new<V: AsRef<[f64]>>(basis: &[V], n_h: usize, space: SpaceSpec, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::domain("solver tolerance must be positive"));
        }
        let cols: Vec<&[f64]> = basis.iter().map(|v| v.as_ref()).collect();
        if let Some(k) = cols.iter().position(|c| c.len() != n_h) {
            return Err(Error::domain(format!(
                "basis vector {k} has length {}, expected {n_h}",
                cols[k].len()
            )));
        }
        if cols.len() > n_h {
            return Err(Error::domain(format!(
                "{} vectors in dimension {n_h} are linearly dependent",
                cols.len()
            )));
        }
        let n = cols.len();
        let (q, r) = if n == 0 {
            (DMatrix::zeros(n_h, 0), DMatrix::zeros(0, 0))
        } else {
            let mat = DMatrix::from_fn(n_h, n, |i, k| cols[k][i]);
            let qr = mat.qr();
            (qr.q(), qr.r())
        };
        let diag_max = (0..n).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
        if let Some(k) = (0..n).find(|&k| !(r[(k, k)].abs() > 1e-13 * diag_max)) {
            return Err(Error::domain(format!(
                "basis is rank deficient (vector {k} depends on the previous ones)"
            )));
        }
        Ok(DistanceSolver {
            space,
            tol,
            n_h,
            g: RowMatrix::from_columns(&cols, n_h),
            q,
            r,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.cols
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    /// Coefficients of the ℓ2 best approximation.
    pub fn least_squares(&self, f: &[f64]) -> Vec<f64> {
        let n = self.dim();
        if n == 0 {
            return Vec::new();
        }
        let qtf = self.q.tr_mul(&DVector::from_column_slice(f));
        let mut alpha = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = qtf[k];
            for j in k + 1..n {
                s -= self.r[(k, j)] * alpha[j];
            }
            alpha[k] = s / self.r[(k, k)];
        }
        alpha
    }

    pub fn solve(&self, f: &[f64]) -> Result<DistResult> {
        self.solve_from(f, None)
    }

    /// Solves starting from `start` coefficients (the least-squares
    /// solution when `None`).
    pub fn solve_from(&self, f: &[f64], start: Option<&[f64]>) -> Result<DistResult> {
        if f.len() != self.n_h {
            return Err(Error::domain(format!(
                "vector has length {}, expected {}",
                f.len(),
                self.n_h
            )));
        }
        let n = self.dim();
        if n == 0 {
            let d = self.space.norm(f);
            return Ok(DistResult {
                dist: d,
                coeffs: Vec::new(),
                iterations: 0,
                status: SolveStatus::Converged,
                objective: vec![d],
            });
        }
        let alpha0 = match start {
            Some(s) if s.len() == n => s.to_vec(),
            Some(s) => {
                return Err(Error::domain(format!(
                    "start has {} coefficients, expected {n}",
                    s.len()
                )))
            }
            None => self.least_squares(f),
        };
        // at p = 2 the least-squares solution is exact, so a start is irrelevant
        let is_l2 = matches!(self.space.exponent(), Exponent::Finite(p) if p == 2.0);
        let alpha0 = if is_l2 && start.is_some() {
            self.least_squares(f)
        } else {
            alpha0
        };
        let result = match self.space.exponent() {
            Exponent::Finite(_) if is_l2 => {
                let d = self.space.norm(&self.g.residual(f, &alpha0));
                DistResult {
                    dist: d,
                    coeffs: alpha0,
                    iterations: 0,
                    status: SolveStatus::Converged,
                    objective: vec![d],
                }
            }
            Exponent::Finite(_) => lbfgs::solve_lp(&self.g, f, alpha0, self.space, self.tol),
            Exponent::One => lad::solve(&self.g, f, &alpha0),
            Exponent::Infinity => chebyshev::solve(&self.g, f, &alpha0),
        };
        // the zero coefficient vector is always feasible
        let fnorm = self.space.norm(f);
        if result.dist > fnorm {
            return Ok(DistResult {
                dist: fnorm,
                coeffs: vec![0.0; n],
                ..result
            });
        }
        Ok(result)
    }
}

/// One-shot `dist_p(f, span(basis))`.
pub fn distance<V: AsRef<[f64]>>(f: &[f64], basis: &[V], space: SpaceSpec, tol: f64) -> Result<DistResult> {
    DistanceSolver::new(basis, f.len(), space, tol)?.solve(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let r = distance(&[1.0, 1.0], &[vec![1.0, 0.0]], SpaceSpec::l2(), 1e-12).unwrap();
        assert!((r.dist - 1.0).abs() < 1e-15 && (r.coeffs[0] - 1.0).abs() < 1e-15);
        let r = distance(&[1.0, 2.0, 3.0], &[vec![1.0, 1.0, 1.0]], SpaceSpec::l1(), 1e-12).unwrap();
        assert!((r.dist - 2.0).abs() < 1e-12 && (r.coeffs[0] - 2.0).abs() < 1e-12);
        let r = distance(&[0.0, 4.0], &[vec![1.0, 1.0]], SpaceSpec::linf(), 1e-12).unwrap();
        assert!((r.dist - 2.0).abs() < 1e-12 && (r.coeffs[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn member_of_span_has_zero_distance() {
        let b = vec![vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, -1.0]];
        let f: Vec<f64> = (0..4).map(|i| 2.0 * b[0][i] - 3.0 * b[1][i]).collect();
        for s in [
            SpaceSpec::l1(),
            SpaceSpec::l2(),
            SpaceSpec::new(3.0).unwrap(),
            SpaceSpec::linf(),
        ] {
            let r = distance(&f, &b, s, 1e-12).unwrap();
            assert!(r.dist < 1e-10, "p={s}: {}", r.dist);
        }
    }

    #[test]
    fn empty_basis_returns_the_norm() {
        let r = distance::<Vec<f64>>(&[3.0, -4.0], &[], SpaceSpec::l1(), 1e-9).unwrap();
        assert_eq!(r.dist, 7.0);
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let b = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]];
        assert!(matches!(
            DistanceSolver::new(&b, 3, SpaceSpec::l1(), 1e-9),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn lp_distance_beats_least_squares() {
        let b = vec![vec![1.0, 0.5, -0.2, 0.3, 0.9], vec![0.1, -1.0, 0.4, 0.0, 0.2]];
        let f = [1.0, -2.0, 0.5, 3.0, 0.0];
        for p in [1.5, 3.0, 10.0] {
            let s = SpaceSpec::new(p).unwrap();
            let solver = DistanceSolver::new(&b, 5, s, 1e-12).unwrap();
            let ls = s.norm(&solver.g.residual(&f, &solver.least_squares(&f)));
            let r = solver.solve(&f).unwrap();
            assert!(r.dist <= ls + 1e-12);
            assert_eq!(r.status, SolveStatus::Converged);
            for w in r.objective.windows(2) {
                assert!(w[1] <= w[0]);
            }
        }
    }
}
