//! Dense two-phase tableau simplex with Bland's rule, used as an
//! independent reference for the ℓ1 and ℓ∞ distance solvers.

use super::{DistResult, SolveStatus};
use crate::error::{Error, Result};
use crate::space::{Exponent, SpaceSpec};

pub const ORACLE_MAX_DIM: usize = 64;
pub const ORACLE_MAX_N: usize = 8;

const EPS: f64 = 1e-11;

/// Exact `dist_p(f, span(basis))` for `p ∈ {1, ∞}` on small instances.
///
/// ℓ1 is solved as `min Σ(u_i + v_i)` subject to
/// `G(α⁺ − α⁻) + u − v = f`; ℓ∞ as `min h` subject to
/// `Gα + h·1 − s = f`, `−Gα + h·1 − t = −f`, all variables non-negative.
pub fn distance_oracle_lp<V: AsRef<[f64]>>(f: &[f64], basis: &[V], space: SpaceSpec) -> Result<DistResult> {
    let (n_h, n) = (f.len(), basis.len());
    if n_h > ORACLE_MAX_DIM || n > ORACLE_MAX_N {
        return Err(Error::range(format!(
            "oracle limited to N_h <= {ORACLE_MAX_DIM} and n <= {ORACLE_MAX_N}, got {n_h} and {n}"
        )));
    }
    if let Some(k) = basis.iter().position(|v| v.as_ref().len() != n_h) {
        return Err(Error::domain(format!("basis vector {k} has the wrong length")));
    }
    let g = |i: usize, k: usize| basis[k].as_ref()[i];
    let (a, b, c) = match space.exponent() {
        Exponent::One => {
            let cols = 2 * n + 2 * n_h;
            let mut a = vec![vec![0.0; cols]; n_h];
            for (i, row) in a.iter_mut().enumerate() {
                for k in 0..n {
                    row[k] = g(i, k);
                    row[n + k] = -g(i, k);
                }
                row[2 * n + i] = 1.0;
                row[2 * n + n_h + i] = -1.0;
            }
            let mut c = vec![0.0; cols];
            for v in c.iter_mut().skip(2 * n) {
                *v = 1.0;
            }
            (a, f.to_vec(), c)
        }
        Exponent::Infinity => {
            let cols = 2 * n + 1 + 2 * n_h;
            let mut a = vec![vec![0.0; cols]; 2 * n_h];
            let mut b = vec![0.0; 2 * n_h];
            for i in 0..n_h {
                for k in 0..n {
                    a[i][k] = g(i, k);
                    a[i][n + k] = -g(i, k);
                    a[n_h + i][k] = -g(i, k);
                    a[n_h + i][n + k] = g(i, k);
                }
                a[i][2 * n] = 1.0;
                a[n_h + i][2 * n] = 1.0;
                a[i][2 * n + 1 + i] = -1.0;
                a[n_h + i][2 * n + 1 + n_h + i] = -1.0;
                b[i] = f[i];
                b[n_h + i] = -f[i];
            }
            let mut c = vec![0.0; cols];
            c[2 * n] = 1.0;
            (a, b, c)
        }
        Exponent::Finite(_) => {
            return Err(Error::Unsupported(
                "the linear-programming oracle covers p = 1 and p = inf only".into(),
            ))
        }
    };
    let (x, iterations) = solve_standard(a, b, &c)?;
    let alpha: Vec<f64> = (0..n).map(|k| x[k] - x[n + k]).collect();
    let r: Vec<f64> = (0..n_h)
        .map(|i| f[i] - (0..n).map(|k| g(i, k) * alpha[k]).sum::<f64>())
        .collect();
    let dist = space.norm(&r);
    Ok(DistResult {
        dist,
        coeffs: alpha,
        iterations,
        status: SolveStatus::Oracle,
        objective: vec![dist],
    })
}

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`. Returns the optimal `x` and the
/// pivot count. The feasible region is assumed non-empty and bounded in the
/// objective (true for both distance programs).
fn solve_standard(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, c: &[f64]) -> Result<(Vec<f64>, usize)> {
    let m = a.len();
    let nv = c.len();
    for i in 0..m {
        if b[i] < 0.0 {
            b[i] = -b[i];
            for v in a[i].iter_mut() {
                *v = -*v;
            }
        }
    }
    // tableau columns: structural, artificial, rhs
    let width = nv + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = a[i].clone();
            row.resize(width, 0.0);
            row[nv + i] = 1.0;
            row[width - 1] = b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    let mut pivots = 0;

    // phase 1: minimize the sum of artificials
    let mut cost1 = vec![0.0; nv + m];
    for v in cost1.iter_mut().skip(nv) {
        *v = 1.0;
    }
    pivots += run_phase(&mut t, &mut basis, &cost1, nv + m)?;
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= nv)
        .map(|(i, _)| t[i][width - 1])
        .sum();
    if infeasibility > 1e-8 {
        return Err(Error::domain("linear program is infeasible"));
    }
    // drive remaining (zero-level) artificials out of the basis
    for i in 0..m {
        if basis[i] >= nv {
            if let Some(j) = (0..nv).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, i, j);
                basis[i] = j;
                pivots += 1;
            }
        }
    }
    // phase 2 on the structural columns only
    let mut cost2 = c.to_vec();
    cost2.resize(nv + m, 0.0);
    pivots += run_phase(&mut t, &mut basis, &cost2, nv)?;

    let mut x = vec![0.0; nv];
    for (i, &j) in basis.iter().enumerate() {
        if j < nv {
            x[j] = t[i][width - 1];
        }
    }
    Ok((x, pivots))
}

/// Simplex iterations with Bland's rule; columns `>= allowed` never enter.
fn run_phase(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Result<usize> {
    let m = t.len();
    let width = t.first().map_or(0, Vec::len);
    let mut pivots = 0;
    loop {
        // reduced costs c_j − c_Bᵀ B⁻¹ A_j, read off the tableau
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z: f64 = (0..m).map(|i| cost[basis[i]] * t[i][j]).sum();
            cost[j] - z < -EPS
        });
        let Some(j) = entering else {
            return Ok(pivots);
        };
        let mut leave: Option<(f64, usize)> = None;
        for i in 0..m {
            if t[i][j] > EPS {
                let ratio = t[i][width - 1] / t[i][j];
                let better = match leave {
                    None => true,
                    Some((r, li)) => ratio < r - EPS || (ratio <= r + EPS && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((ratio, i));
                }
            }
        }
        let Some((_, i)) = leave else {
            return Err(Error::domain("linear program is unbounded"));
        };
        pivot(t, i, j);
        basis[i] = j;
        pivots += 1;
        if pivots > 100_000 {
            return Err(Error::domain("simplex pivot limit exceeded"));
        }
    }
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let factor = r[col];
            if factor != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_examples() {
        let r = distance_oracle_lp(&[1.0, 2.0, 3.0], &[vec![1.0, 1.0, 1.0]], SpaceSpec::l1()).unwrap();
        assert!((r.dist - 2.0).abs() < 1e-9 && (r.coeffs[0] - 2.0).abs() < 1e-9);
        assert_eq!(r.status, SolveStatus::Oracle);
        let r = distance_oracle_lp(&[0.0, 4.0], &[vec![1.0, 1.0]], SpaceSpec::linf()).unwrap();
        assert!((r.dist - 2.0).abs() < 1e-9 && (r.coeffs[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_vector() {
        for s in [SpaceSpec::l1(), SpaceSpec::linf()] {
            let r = distance_oracle_lp(&[0.0; 4], &[vec![1.0, 2.0, 3.0, 4.0]], s).unwrap();
            assert_eq!(r.dist, 0.0);
            assert_eq!(r.coeffs, vec![0.0]);
        }
    }

    #[test]
    fn size_limits() {
        let f = vec![1.0; ORACLE_MAX_DIM + 1];
        let b = vec![vec![1.0; ORACLE_MAX_DIM + 1]];
        assert!(matches!(
            distance_oracle_lp(&f, &b, SpaceSpec::l1()),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            distance_oracle_lp(&[1.0], &[vec![1.0]], SpaceSpec::l2()),
            Err(Error::Unsupported(_))
        ));
    }
}
