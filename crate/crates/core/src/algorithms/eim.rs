use rayon::prelude::*;

use super::{check_nonempty, select, GreedyConfig, Trace, TraceRecord, TrainingSet};
use crate::cputime::CpuClock;
use crate::error::{Error, Result};
use crate::projector::{BasisKind, ReducedBasis};
use crate::space::{peak_index, Exponent};

/// Empirical interpolation method.
///
/// Each element keeps its interpolation residual `f - I_n(f)`. Because
/// `h_k(z_m) = 0` for `m < k` and `h_k(z_k) = 1`, the interpolation system is
/// unit lower triangular and forward substitution adds one coefficient per
/// iteration, `β_n = (f - I_n(f))(z_n)`; the residual is advanced with it.
pub fn run_eim(ts: &TrainingSet, cfg: &GreedyConfig) -> Result<(ReducedBasis, Trace)> {
    check_nonempty(ts)?;
    cfg.validate()?;
    if ts.space.exponent() != Exponent::Infinity {
        return Err(Error::Unsupported(format!(
            "EIM is defined for l_inf, the training set is in l{}",
            ts.space
        )));
    }
    let mut clock = CpuClock::start();
    let n_h = ts.n_h();
    let mut basis = ReducedBasis::new(ts.space, n_h, BasisKind::Eim);
    basis.points = Some(Vec::new());
    let mut trace = Trace::default();
    let mut residuals = ts.data().to_vec();
    let mut betas: Vec<Vec<f64>> = vec![Vec::new(); ts.n_tr()];
    let mut errors: Vec<f64> = residuals.par_chunks(n_h).map(sup_norm).collect();
    let err0 = errors.iter().cloned().fold(0.0, f64::max);
    let mut excluded = vec![false; ts.n_tr()];

    for n in 0..cfg.max_iterations.min(ts.n_tr()) {
        let Some((idx, max)) = select(&errors, &excluded, cfg.weakness) else {
            break;
        };
        if max <= cfg.stop_rel * err0 || max == 0.0 {
            trace.notes.push(format!("training set exhausted after {n} iterations"));
            break;
        }
        let r = &residuals[idx * n_h..(idx + 1) * n_h];
        let z = peak_index(r);
        let pivot = r[z];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Iteration {
                iteration: n,
                index: idx,
                reason: "singular interpolation system".into(),
            });
        }
        let h: Vec<f64> = r.iter().map(|v| v / pivot).collect();
        let mut column = betas[idx].clone();
        column.push(pivot);
        basis.push(h)?;
        basis.push_snapshot_column(column);
        basis.selected.push(idx);
        basis.scores.push(max);
        basis.points.as_mut().expect("points").push(z);
        excluded[idx] = true;

        let h = basis.vector(n);
        residuals
            .par_chunks_mut(n_h)
            .zip(betas.par_iter_mut())
            .zip(errors.par_iter_mut())
            .for_each(|((r, beta), err)| {
                let b = r[z];
                if b != 0.0 {
                    for (ri, hi) in r.iter_mut().zip(h) {
                        *ri -= b * hi;
                    }
                }
                beta.push(b);
                *err = sup_norm(r);
            });
        trace.records.push(TraceRecord {
            iteration: n + 1,
            selected: Some(idx),
            score: max,
            cputime_s: clock.elapsed(),
        });
    }
    Ok((basis, trace))
}

/// Coefficients `β` of the interpolant of `f` at the basis points, from the
/// full lower-triangular system `Σ_k β_k h_k(z_m) = f(z_m)`.
pub fn interpolation_coefficients(f: &[f64], basis: &ReducedBasis) -> Result<Vec<f64>> {
    let points = basis
        .points
        .as_ref()
        .ok_or_else(|| Error::domain("basis has no interpolation points"))?;
    let n = basis.len();
    let mut beta = vec![0.0; n];
    for m in 0..n {
        let z = points[m];
        let mut s = f[z];
        for (k, b) in beta.iter().enumerate().take(m) {
            s -= b * basis.vector(k)[z];
        }
        let diag = basis.vector(m)[z];
        if diag == 0.0 {
            return Err(Error::domain("singular interpolation system"));
        }
        beta[m] = s / diag;
    }
    Ok(beta)
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{sample_family, Family};
    use crate::space::SpaceSpec;

    fn small_1d() -> TrainingSet {
        let grid = Family::OneD.grid_with(&[200], &[30]);
        sample_family(Family::OneD, &grid, SpaceSpec::linf()).unwrap()
    }

    #[test]
    fn interpolation_matrix_is_unit_lower_triangular() {
        let ts = small_1d();
        let cfg = GreedyConfig {
            max_iterations: 8,
            ..Default::default()
        };
        let (basis, _) = run_eim(&ts, &cfg).unwrap();
        let z = basis.points.clone().unwrap();
        for k in 0..basis.len() {
            let h = basis.vector(k);
            assert_eq!(h[z[k]], 1.0);
            assert!((sup_norm(h) - 1.0).abs() < 1e-15);
            for &zm in &z[..k] {
                assert!(h[zm].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triangular_solve_matches_incremental_residual() {
        let ts = small_1d();
        let cfg = GreedyConfig {
            max_iterations: 6,
            ..Default::default()
        };
        let (basis, _) = run_eim(&ts, &cfg).unwrap();
        let f = ts.column(17);
        let beta = interpolation_coefficients(f, &basis).unwrap();
        let mut interp = vec![0.0; f.len()];
        for (k, b) in beta.iter().enumerate() {
            for (o, h) in interp.iter_mut().zip(basis.vector(k)) {
                *o += b * h;
            }
        }
        for &z in basis.points.as_ref().unwrap() {
            assert!((interp[z] - f[z]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_other_spaces() {
        let ts = small_1d().with_space(SpaceSpec::l1());
        assert!(matches!(
            run_eim(&ts, &GreedyConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
