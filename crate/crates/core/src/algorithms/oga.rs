use rayon::prelude::*;

use super::{check_nonempty, select, GreedyConfig, Trace, TraceRecord, TrainingSet};
use crate::cputime::CpuClock;
use crate::distsolver::{DistanceSolver, SolveStatus};
use crate::error::{Error, Result};
use crate::projector::{BasisKind, ReducedBasis};

/// Orthogonal greedy algorithm: select by `dist_p(f, V_n)`, extend the basis
/// with `h_n = (f_n − P f_n) / dist(f_n, V_n)` where `P f_n` is the best
/// approximation.
pub fn run_oga(ts: &TrainingSet, cfg: &GreedyConfig) -> Result<(ReducedBasis, Trace)> {
    check_nonempty(ts)?;
    cfg.validate()?;
    let mut clock = CpuClock::start();
    let space = ts.space;
    let mut basis = ReducedBasis::new(space, ts.n_h(), BasisKind::Oga);
    let mut trace = Trace::default();
    let mut excluded = vec![false; ts.n_tr()];
    let mut sigma0 = None;
    let mut capped = 0usize;

    for n in 0..cfg.max_iterations.min(ts.n_tr()) {
        let solver =
            DistanceSolver::new(basis.vectors(), ts.n_h(), space, cfg.oga_tol).map_err(|e| Error::Iteration {
                iteration: n,
                index: basis.selected.last().copied().unwrap_or(0),
                reason: e.to_string(),
            })?;
        let results: Vec<Result<_>> = (0..ts.n_tr())
            .into_par_iter()
            .map(|i| {
                if excluded[i] {
                    Ok(None)
                } else {
                    solver.solve(ts.column(i)).map(Some)
                }
            })
            .collect();
        let mut scores = vec![0.0; ts.n_tr()];
        let mut solutions = vec![None; ts.n_tr()];
        for (i, r) in results.into_iter().enumerate() {
            let r = r.map_err(|e| Error::Iteration {
                iteration: n,
                index: i,
                reason: e.to_string(),
            })?;
            if let Some(r) = r {
                if r.status == SolveStatus::MaxIter {
                    capped += 1;
                }
                scores[i] = r.dist;
                solutions[i] = Some(r);
            }
        }
        let Some((idx, max)) = select(&scores, &excluded, cfg.weakness) else {
            break;
        };
        let s0 = *sigma0.get_or_insert(max);
        if max <= cfg.stop_rel * s0 || max == 0.0 {
            trace.notes.push(format!("training set exhausted after {n} iterations"));
            break;
        }
        let sol = solutions[idx].take().expect("scored element has a solution");
        let f = ts.column(idx);
        let mut residual = f.to_vec();
        for (k, a) in sol.coeffs.iter().enumerate() {
            for (r, g) in residual.iter_mut().zip(basis.vector(k)) {
                *r -= a * g;
            }
        }
        let norm = space.norm(&residual);
        if !(norm > 0.0) {
            return Err(Error::Iteration {
                iteration: n,
                index: idx,
                reason: "selected element lies in the current subspace".into(),
            });
        }
        let h: Vec<f64> = residual.iter().map(|v| v / norm).collect();
        let mut column = sol.coeffs;
        column.push(norm);
        basis.push(h)?;
        basis.push_snapshot_column(column);
        basis.selected.push(idx);
        basis.scores.push(max);
        excluded[idx] = true;
        trace.records.push(TraceRecord {
            iteration: n + 1,
            selected: Some(idx),
            score: max,
            cputime_s: clock.elapsed(),
        });
    }
    if capped > 0 {
        trace.notes.push(format!(
            "{capped} inner distance solves hit the iteration cap (scores are upper bounds)"
        ));
    }
    Ok((basis, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceSpec;

    #[test]
    fn single_element() {
        let ts = TrainingSet::from_columns(vec![vec![3.0, -4.0]], SpaceSpec::l1(), "one").unwrap();
        let (basis, trace) = run_oga(&ts, &GreedyConfig::default()).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(trace.scores(), vec![7.0]);
        let d = crate::distsolver::distance(ts.column(0), basis.vectors(), SpaceSpec::l1(), 1e-12).unwrap();
        assert!(d.dist < 1e-15);
    }

    #[test]
    fn scores_do_not_increase() {
        for s in [SpaceSpec::l1(), SpaceSpec::new(3.0).unwrap(), SpaceSpec::linf()] {
            let ts = crate::families::gen_random_set(4, 30, 6, 25, s).unwrap();
            let cfg = GreedyConfig {
                max_iterations: 6,
                ..Default::default()
            };
            let (_, trace) = run_oga(&ts, &cfg).unwrap();
            for w in trace.scores().windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-9), "p={s}: {w:?}");
            }
        }
    }
}
