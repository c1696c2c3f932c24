//! Exact least absolute deviations by vertex exchange.
//!
//! A vertex is a set `B` of `n` rows with `G_B` nonsingular and zero residual
//! on `B`. From a vertex, releasing row `j ∈ B` gives the edge direction
//! `d = σ G_B^{-1} e_j`; its initial slope is `1 - |λ_j|` with
//! `λ = G_B^{-T} Σ_{i∉B} sgn(r_i) g_i`, so the vertex is optimal once
//! `|λ| ≤ 1`. Along an edge the objective is convex piecewise linear and the
//! exact minimizer is the breakpoint where the running slope turns
//! non-negative, found by weighted selection in expected linear time. Edges
//! are priced by steepest edge in coefficient space. The first vertex is
//! reached from the starting coefficients by purification, so the result is
//! never worse than the start.

use nalgebra::DVector;

use super::{dot, DistResult, RowMatrix, SolveStatus};
use crate::space::sgn;

const OPTIMALITY_TOL: f64 = 1e-11;
/// Pivots between exact residual recomputations.
const REFRESH: usize = 8;

pub(crate) fn solve(g: &RowMatrix, f: &[f64], start: &[f64]) -> DistResult {
    let n = g.cols;
    let max_iter = 50 * n + 100;
    let start_obj = l1(&g.residual(f, start));
    let mut trace = vec![start_obj];
    let Some((mut alpha, mut basis)) = purify(g, f, start) else {
        return finish(g, f, start, start.to_vec(), start_obj, trace, 0, SolveStatus::MaxIter);
    };
    let mut r = g.residual(f, &alpha);
    let mut in_basis = vec![false; g.rows];
    for &b in &basis {
        in_basis[b] = true;
        r[b] = 0.0;
    }
    let mut obj = l1(&r);
    trace.push(obj);
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;

    let mut nu = sign_sum(g, &r, &in_basis);
    while iterations < max_iter {
        let gb = g.rows_matrix(&basis);
        let Some(inv) = gb.try_inverse() else {
            break;
        };
        let lambda = inv.tr_mul(&DVector::from_column_slice(&nu));
        // steepest edge: reduced cost per unit length of the direction G_B^{-1} e_j
        let mut candidates: Vec<(f64, usize)> = (0..n)
            .filter(|&j| lambda[j].abs() > 1.0 + OPTIMALITY_TOL)
            .map(|j| ((lambda[j].abs() - 1.0) / inv.column(j).norm(), j))
            .collect();
        if candidates.is_empty() {
            status = SolveStatus::Converged;
            break;
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut step = None;
        for &(_, j) in &candidates {
            let d: Vec<f64> = inv.column(j).iter().map(|v| sgn(lambda[j]) * v).collect();
            let w = g.mul(&d);
            if let Some((entering, t)) = edge_search(&r, &w, &in_basis, lambda[j].abs()) {
                step = Some((j, entering, t, d, w));
                break;
            }
        }
        iterations += 1;
        let Some((j, entering, t, d, w)) = step else {
            // every improving edge is blocked by degenerate rows at t = 0
            status = SolveStatus::Converged;
            break;
        };
        for (a, dk) in alpha.iter_mut().zip(d.iter()) {
            *a += t * dk;
        }
        let leaving = basis[j];
        basis[j] = entering;
        let refresh = iterations % REFRESH == 0;
        if refresh {
            in_basis[leaving] = false;
            in_basis[entering] = true;
            r = g.residual(f, &alpha);
            for &b in &basis {
                r[b] = 0.0;
            }
            nu = sign_sum(g, &r, &in_basis);
        } else {
            // signs change only where a breakpoint was crossed and at the
            // two exchanged rows
            for i in 0..r.len() {
                let before = if in_basis[i] { 0.0 } else { sgn(r[i]) };
                r[i] -= t * w[i];
                if i == entering {
                    r[i] = 0.0;
                }
                let after = if i == entering || (in_basis[i] && i != leaving) {
                    0.0
                } else {
                    sgn(r[i])
                };
                if after != before {
                    for (o, gi) in nu.iter_mut().zip(g.row(i)) {
                        *o += (after - before) * gi;
                    }
                }
            }
            in_basis[leaving] = false;
            in_basis[entering] = true;
            for &b in &basis {
                r[b] = 0.0;
            }
        }
        let new_obj = l1(&r);
        if !(new_obj < obj) {
            // no strict progress: stalled on a degenerate or ill-conditioned vertex
            status = SolveStatus::Converged;
            break;
        }
        obj = new_obj;
        trace.push(obj);
    }
    finish(g, f, start, alpha, start_obj, trace, iterations, status)
}

/// Exact objective of the final iterate; falls back to the start if
/// rounding made it worse.
#[allow(clippy::too_many_arguments)]
fn finish(
    g: &RowMatrix,
    f: &[f64],
    start: &[f64],
    alpha: Vec<f64>,
    start_obj: f64,
    trace: Vec<f64>,
    iterations: usize,
    status: SolveStatus,
) -> DistResult {
    let obj = l1(&g.residual(f, &alpha));
    let (dist, coeffs) = if obj <= start_obj {
        (obj, alpha)
    } else {
        (start_obj, start.to_vec())
    };
    let mut objective = monotone(trace);
    objective.push(dist.min(*objective.last().expect("non-empty trace")));
    DistResult {
        dist,
        coeffs,
        iterations,
        status,
        objective,
    }
}

/// `Σ_{i∉B} sgn(r_i) g_i`.
fn sign_sum(g: &RowMatrix, r: &[f64], in_basis: &[bool]) -> Vec<f64> {
    let mut nu = vec![0.0; g.cols];
    for (i, &ri) in r.iter().enumerate() {
        if !in_basis[i] && ri != 0.0 {
            let s = sgn(ri);
            for (o, gi) in nu.iter_mut().zip(g.row(i)) {
                *o += s * gi;
            }
        }
    }
    nu
}

/// Moves from `start` to a vertex without increasing the objective: each
/// step minimizes exactly along a descent direction orthogonal to the rows
/// already fixed at zero residual, which pins one more row.
fn purify(g: &RowMatrix, f: &[f64], start: &[f64]) -> Option<(Vec<f64>, Vec<usize>)> {
    let n = g.cols;
    let mut alpha = start.to_vec();
    let mut r = g.residual(f, &alpha);
    let mut in_basis = vec![false; g.rows];
    let mut basis = Vec::with_capacity(n);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut d = sign_sum(g, &r, &in_basis);
        project_out(&q, &mut d);
        let scale = dot(&d, &d).sqrt();
        if !(scale > 1e-12 * (1.0 + l1(&d))) {
            d = null_vector(&q, n)?;
        }
        let w = g.mul(&d);
        let mut items: Vec<(f64, f64, usize)> = (0..g.rows)
            .filter(|&i| !in_basis[i] && w[i] != 0.0)
            .map(|i| (r[i] / w[i], w[i].abs(), i))
            .collect();
        let total: f64 = items.iter().map(|x| x.1).sum();
        let (t, _, row) = cumulative_select(&mut items, 0.5 * total)?;
        for (a, dk) in alpha.iter_mut().zip(&d) {
            *a += t * dk;
        }
        for (ri, wi) in r.iter_mut().zip(&w) {
            *ri -= t * wi;
        }
        r[row] = 0.0;
        let mut v = g.row(row).to_vec();
        project_out(&q, &mut v);
        project_out(&q, &mut v);
        let nv = dot(&v, &v).sqrt();
        if !(nv > 0.0) {
            return None;
        }
        q.push(v.into_iter().map(|x| x / nv).collect());
        in_basis[row] = true;
        basis.push(row);
    }
    Some((alpha, basis))
}

fn project_out(q: &[Vec<f64>], v: &mut [f64]) {
    for qk in q {
        let c = dot(qk, v);
        for (vi, qi) in v.iter_mut().zip(qk) {
            *vi -= c * qi;
        }
    }
}

/// The coordinate vector with the largest component orthogonal to `q`.
fn null_vector(q: &[Vec<f64>], n: usize) -> Option<Vec<f64>> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        project_out(q, &mut e);
        project_out(q, &mut e);
        let ne = dot(&e, &e).sqrt();
        if best.as_ref().is_none_or(|b| ne > b.0) {
            best = Some((ne, e));
        }
    }
    best.filter(|b| b.0 > 1e-8).map(|b| b.1)
}

/// Exact minimizer along an edge leaving the vertex with initial slope
/// `1 − |λ_j|`: the entering row and the step length.
fn edge_search(r: &[f64], w: &[f64], in_basis: &[bool], lambda_abs: f64) -> Option<(usize, f64)> {
    let mut slope = 1.0 - lambda_abs;
    let mut items: Vec<(f64, f64, usize)> = Vec::new();
    for i in 0..r.len() {
        if in_basis[i] || w[i] == 0.0 {
            continue;
        }
        if r[i] == 0.0 {
            slope += w[i].abs();
            continue;
        }
        let t = r[i] / w[i];
        if t > 0.0 {
            items.push((t, 2.0 * w[i].abs(), i));
        }
    }
    if slope >= 0.0 {
        return None;
    }
    cumulative_select(&mut items, -slope).map(|(t, _, i)| (i, t))
}

fn by_position(a: &(f64, f64, usize), b: &(f64, f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.2.cmp(&b.2))
}

/// The first item, in order of position, at which the running sum of
/// weights reaches `target`. Expected linear time; the split point is
/// guessed from the weight fraction, since edge targets are usually small.
fn cumulative_select(items: &mut [(f64, f64, usize)], mut target: f64) -> Option<(f64, f64, usize)> {
    let mut lo = 0;
    let mut hi = items.len();
    while lo < hi {
        let slice = &mut items[lo..hi];
        let len = slice.len();
        let total: f64 = slice.iter().map(|x| x.1).sum();
        if total < target {
            return None;
        }
        // clamped so that every round discards a fixed fraction
        let guess = (len as f64 * (target / total) * 1.25) as usize + 1;
        let k = guess.clamp(len / 16, len / 2);
        slice.select_nth_unstable_by(k, by_position);
        let left: f64 = slice[..k].iter().map(|x| x.1).sum();
        if left >= target && k > 0 {
            hi = lo + k;
        } else if left + slice[k].1 >= target {
            return Some(slice[k]);
        } else {
            target -= left + slice[k].1;
            lo += k + 1;
        }
    }
    None
}

fn l1(r: &[f64]) -> f64 {
    r.iter().map(|v| v.abs()).sum()
}

fn monotone(mut trace: Vec<f64>) -> Vec<f64> {
    for k in 1..trace.len() {
        trace[k] = trace[k].min(trace[k - 1]);
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: &[&[f64]]) -> RowMatrix {
        RowMatrix::from_columns(cols, cols[0].len())
    }

    #[test]
    fn cumulative_selection() {
        let mut items = vec![(3.0, 1.0, 0), (1.0, 1.0, 1), (2.0, 1.0, 2), (5.0, 4.0, 3)];
        assert_eq!(cumulative_select(&mut items, 2.5).unwrap().2, 0);
        assert_eq!(cumulative_select(&mut items, 0.0).unwrap().2, 1);
        assert_eq!(cumulative_select(&mut items, 7.0).unwrap().2, 3);
        assert!(cumulative_select(&mut items, 7.5).is_none());
    }

    #[test]
    fn never_worse_than_the_start() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        let cols: Vec<Vec<f64>> = (0..6).map(|k| xs.iter().map(|x| x.powi(k)).collect()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let g = matrix(&refs);
        let f: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let start = vec![0.0; 6];
        let r = solve(&g, &f, &start);
        assert!(r.dist <= l1(&f));
        for w in r.objective.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn median_of_three() {
        let g = matrix(&[&[1.0, 1.0, 1.0]]);
        let r = solve(&g, &[1.0, 2.0, 3.0], &[0.0]);
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.coeffs[0] - 2.0).abs() < 1e-14);
        assert!((r.dist - 2.0).abs() < 1e-14);
    }

    #[test]
    fn step_data_matches_the_oracle() {
        let xs: Vec<f64> = (0..60).map(|i| -1.0 + i as f64 / 29.5).collect();
        let cols: Vec<Vec<f64>> = (0..5)
            .map(|k| xs.iter().map(|x| (k as f64 * x).cos()).collect())
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let g = matrix(&refs);
        for shift in 0..6 {
            let f: Vec<f64> = xs
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    (1.0 - x) * (3.0 * x).cos()
                        + if (20 + shift..26 + shift).contains(&i) {
                            1.0
                        } else {
                            0.0
                        }
                })
                .collect();
            let got = solve(&g, &f, &[0.0; 5]);
            let want = crate::distsolver::distance_oracle_lp(&f, &cols, crate::SpaceSpec::l1()).unwrap();
            assert_eq!(got.status, SolveStatus::Converged);
            assert!(
                (got.dist - want.dist).abs() <= 1e-9 * (1.0 + want.dist),
                "{} vs {}",
                got.dist,
                want.dist
            );
        }
    }

    #[test]
    fn weighted_median_line() {
        // fit y = a + b x through five points with one outlier
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 3.0, 5.0, 100.0, 9.0];
        let g = matrix(&[&[1.0; 5], &xs]);
        let r = solve(&g, &ys, &[0.0, 0.0]);
        assert!((r.coeffs[0] - 1.0).abs() < 1e-12 && (r.coeffs[1] - 2.0).abs() < 1e-12);
        assert!((r.dist - 93.0).abs() < 1e-10);
    }
}
