//! Exact discrete Chebyshev approximation by a primal active-set simplex.
//!
//! Variables are `x = (α, h)`; each row `i` contributes the two inequality
//! constraints `h + r_i ≥ 0` and `h − r_i ≥ 0` with `r = f − Gα`, numbered
//! `2i` and `2i + 1`. They are never formed explicitly: slacks and rates are
//! recomputed from `G` on the fly, so the cost per pivot is `O(N_h n)`.

use nalgebra::{DMatrix, DVector};

use super::{dot, DistResult, RowMatrix, SolveStatus};

const MULTIPLIER_TOL: f64 = 1e-12;

struct Problem<'a> {
    g: &'a RowMatrix,
    f: &'a [f64],
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.g.cols + 1
    }

    /// Constraint normal `a_k` in `(α, h)` coordinates.
    fn normal(&self, k: usize) -> Vec<f64> {
        let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
        let mut a: Vec<f64> = self.g.row(k / 2).iter().map(|v| sign * v).collect();
        a.push(1.0);
        a
    }

    /// Right-hand side `b_k` of `a_k · x ≥ b_k`.
    fn rhs(&self, k: usize) -> f64 {
        let fi = self.f[k / 2];
        if k.is_multiple_of(2) {
            -fi
        } else {
            fi
        }
    }

    fn slack(&self, k: usize, r: &[f64], h: f64) -> f64 {
        if k.is_multiple_of(2) {
            h + r[k / 2]
        } else {
            h - r[k / 2]
        }
    }

    /// Rate of change of every slack along `d = (dα, dh)`.
    fn rates(&self, d: &[f64]) -> Vec<f64> {
        let n = self.g.cols;
        let u = self.g.mul(&d[..n]);
        let dh = d[n];
        let mut out = Vec::with_capacity(2 * u.len());
        for ui in u {
            out.push(dh - ui);
            out.push(dh + ui);
        }
        out
    }

    fn active_matrix(&self, w: &[usize]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(w.len(), dim);
        for (row, &k) in w.iter().enumerate() {
            for (c, v) in self.normal(k).into_iter().enumerate() {
                m[(row, c)] = v;
            }
        }
        m
    }

    /// Largest feasible step along `d` and the blocking constraint.
    fn ratio_test(&self, d: &[f64], r: &[f64], h: f64, active: &[bool]) -> Option<(f64, usize)> {
        let rates = self.rates(d);
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut best: Option<(f64, usize)> = None;
        for (k, &rate) in rates.iter().enumerate() {
            if active[k] || rate >= -1e-14 * scale {
                continue;
            }
            let t = self.slack(k, r, h).max(0.0) / -rate;
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, k));
            }
        }
        best
    }
}

pub(crate) fn solve(g: &RowMatrix, f: &[f64], start: &[f64]) -> DistResult {
    let n = g.cols;
    let dim = n + 1;
    let prob = Problem { g, f };
    let max_iter = 50 * dim + 500;

    let mut alpha = start.to_vec();
    let mut r = g.residual(f, &alpha);
    let mut h = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut trace = vec![h];
    let mut active = vec![false; 2 * f.len()];
    let peak = crate::space::peak_index(&r);
    let first = if r[peak] >= 0.0 { 2 * peak + 1 } else { 2 * peak };
    let mut w = vec![first];
    active[first] = true;
    let mut iterations = 0;

    // move to a vertex, never increasing h
    while w.len() < dim && iterations < max_iter {
        iterations += 1;
        let a = prob.active_matrix(&w);
        let Some(mut d) = null_direction(&a, dim) else {
            break;
        };
        let mut block = prob.ratio_test(&d, &r, h, &active);
        if block.is_none() && d[n].abs() < 1e-14 {
            for v in d.iter_mut() {
                *v = -*v;
            }
            block = prob.ratio_test(&d, &r, h, &active);
        }
        let Some((t, k)) = block else {
            break;
        };
        for (ai, di) in alpha.iter_mut().zip(&d) {
            *ai += t * di;
        }
        h += t * d[n];
        r = g.residual(f, &alpha);
        w.push(k);
        active[k] = true;
        trace.push(h);
    }

    let mut status = SolveStatus::MaxIter;
    let mut bland = false;
    if w.len() == dim {
        while iterations < max_iter {
            let a = prob.active_matrix(&w);
            let lu = a.clone().lu();
            // re-anchor the vertex on the active set to shed drift
            let b = DVector::from_iterator(dim, w.iter().map(|&k| prob.rhs(k)));
            if let Some(x) = lu.solve(&b) {
                alpha.copy_from_slice(&x.as_slice()[..n]);
                h = x[n];
                r = g.residual(f, &alpha);
            }
            let mut c = DVector::zeros(dim);
            c[n] = 1.0;
            let Some(lambda) = a.transpose().lu().solve(&c) else {
                break;
            };
            let negative: Vec<usize> = (0..dim).filter(|&q| lambda[q] < -MULTIPLIER_TOL).collect();
            if negative.is_empty() {
                status = SolveStatus::Converged;
                break;
            }
            let q = if bland {
                *negative.iter().min_by_key(|&&q| w[q]).expect("non-empty")
            } else {
                *negative
                    .iter()
                    .min_by(|&&x, &&y| lambda[x].total_cmp(&lambda[y]).then(x.cmp(&y)))
                    .expect("non-empty")
            };
            let mut e = DVector::zeros(dim);
            e[q] = 1.0;
            let Some(d) = lu.solve(&e) else {
                break;
            };
            let d: Vec<f64> = d.iter().cloned().collect();
            iterations += 1;
            let Some((t, k)) = prob.ratio_test(&d, &r, h, &active) else {
                break;
            };
            bland = t == 0.0;
            active[w[q]] = false;
            w[q] = k;
            active[k] = true;
            for (ai, di) in alpha.iter_mut().zip(&d) {
                *ai += t * di;
            }
            h += t * d[n];
            trace.push(h);
        }
    }
    r = g.residual(f, &alpha);
    let dist = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 1..trace.len() {
        trace[k] = trace[k].min(trace[k - 1]);
    }
    DistResult {
        dist,
        coeffs: alpha,
        iterations,
        status,
        objective: trace,
    }
}

/// A direction `d` with `A d = 0`, preferring the projected steepest descent
/// of `h`; falls back to any null vector when `e_h` lies in the row space.
fn null_direction(a: &DMatrix<f64>, dim: usize) -> Option<Vec<f64>> {
    let k = a.nrows();
    if k >= dim {
        return None;
    }
    // orthonormal basis of the row space
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        let mut v: Vec<f64> = a.row(i).iter().cloned().collect();
        orthogonalize(&mut v, &rows);
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-12 {
            rows.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    let mut d = vec![0.0; dim];
    d[dim - 1] = -1.0;
    orthogonalize(&mut d, &rows);
    if dot(&d, &d).sqrt() > 1e-10 {
        return Some(d);
    }
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        orthogonalize(&mut e, &rows);
        if dot(&e, &e).sqrt() > 1e-6 {
            return Some(e);
        }
    }
    None
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint() {
        let g = RowMatrix::from_columns(&[&[1.0, 1.0]], 2);
        let r = solve(&g, &[0.0, 4.0], &[0.0]);
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.dist - 2.0).abs() < 1e-14 && (r.coeffs[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn minimax_line() {
        // best uniform line through (0,0), (1,1), (2,0): y = 0.5 with error 0.5
        let g = RowMatrix::from_columns(&[&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]], 3);
        let r = solve(&g, &[0.0, 1.0, 0.0], &[0.0, 0.0]);
        assert!((r.dist - 0.5).abs() < 1e-14);
        assert!((r.coeffs[0] - 0.5).abs() < 1e-14 && r.coeffs[1].abs() < 1e-14);
    }
}
