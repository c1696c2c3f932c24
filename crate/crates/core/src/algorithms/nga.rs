use super::{check_nonempty, select, GreedyConfig, Trace, TraceRecord, TrainingSet};
use crate::cputime::CpuClock;
use crate::error::{Error, Result};
use crate::projector::{BasisKind, ReducedBasis, ResidualCache};
use crate::space::{peak_index, Exponent};

/// Natural greedy algorithm: select by `‖R_n(f)‖`, extend the basis with the
/// normalized residual `R_n(f_n) / ‖R_n(f_n)‖`.
pub fn run_nga(ts: &TrainingSet, cfg: &GreedyConfig) -> Result<(ReducedBasis, Trace)> {
    check_nonempty(ts)?;
    cfg.validate()?;
    let mut clock = CpuClock::start();
    let space = ts.space;
    let mut basis = ReducedBasis::new(space, ts.n_h(), BasisKind::Nga);
    let linf = space.exponent() == Exponent::Infinity;
    if linf {
        basis.points = Some(Vec::new());
    }
    let mut trace = Trace::default();
    let mut cache = ResidualCache::new(ts);
    let tau0 = cache.norms().iter().cloned().fold(0.0, f64::max);
    let mut excluded = vec![false; ts.n_tr()];

    for n in 0..cfg.max_iterations.min(ts.n_tr()) {
        let Some((idx, max)) = select(cache.norms(), &excluded, cfg.weakness) else {
            break;
        };
        if max <= cfg.stop_rel * tau0 || max == 0.0 {
            trace.notes.push(format!("training set exhausted after {n} iterations"));
            break;
        }
        let score = cache.norms()[idx];
        let g: Vec<f64> = cache.residual(idx).iter().map(|v| v / score).collect();
        let mut column = cache.coeffs(idx).to_vec();
        column.push(score);
        basis.push(g).map_err(|e| Error::Iteration {
            iteration: n,
            index: idx,
            reason: e.to_string(),
        })?;
        basis.push_snapshot_column(column);
        basis.selected.push(idx);
        basis.scores.push(max);
        let peak = peak_index(basis.vector(n));
        if let Some(points) = basis.points.as_mut() {
            points.push(peak);
        }
        excluded[idx] = true;
        cache.update(basis.vector(n))?;
        trace.records.push(TraceRecord {
            iteration: n + 1,
            selected: Some(idx),
            score: max,
            cputime_s: clock.elapsed(),
        });
    }
    Ok((basis, trace))
}
