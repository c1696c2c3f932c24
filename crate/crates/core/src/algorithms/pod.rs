use nalgebra::{DMatrix, DMatrixView};
use serde::Serialize;

use super::{check_nonempty, Trace, TraceRecord, TrainingSet};
use crate::cputime::CpuClock;
use crate::error::{Error, Result};
use crate::projector::{BasisKind, ReducedBasis};
use crate::space::SpaceSpec;

/// Snapshot matrices with more entries than this are decomposed through
/// their `N_tr × N_tr` Gram matrix instead of a direct SVD.
pub const DEFAULT_POD_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PodMethod {
    Svd,
    Gram,
}

/// Leading left singular vectors of the snapshot matrix.
pub fn run_pod(ts: &TrainingSet, m: usize) -> Result<(ReducedBasis, Trace)> {
    run_pod_with_budget(ts, m, DEFAULT_POD_BUDGET).map(|(b, t, _)| (b, t))
}

/// [`run_pod`] with an explicit SVD size budget; also reports which
/// decomposition was used.
pub fn run_pod_with_budget(ts: &TrainingSet, m: usize, budget: usize) -> Result<(ReducedBasis, Trace, PodMethod)> {
    check_nonempty(ts)?;
    let (n_h, n_tr) = (ts.n_h(), ts.n_tr());
    if m > n_h.min(n_tr) {
        return Err(Error::range(format!(
            "POD of {m} modes requested from a {n_h} x {n_tr} snapshot matrix"
        )));
    }
    let mut clock = CpuClock::start();
    let f = DMatrixView::from_slice(ts.data(), n_h, n_tr);
    let method = if n_h.saturating_mul(n_tr) <= budget {
        PodMethod::Svd
    } else {
        PodMethod::Gram
    };

    // (singular value, right singular vector or left singular vector)
    let (sigmas, vectors, rank_tol) = match method {
        PodMethod::Svd => {
            let svd = f.clone_owned().svd(true, false);
            let u = svd.u.expect("left singular vectors requested");
            let s = svd.singular_values;
            let mut order: Vec<usize> = (0..s.len()).collect();
            order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
            let sig: Vec<f64> = order.iter().map(|&k| s[k]).collect();
            let vecs: Vec<Vec<f64>> = order.iter().map(|&k| u.column(k).iter().cloned().collect()).collect();
            let smax = sig.first().cloned().unwrap_or(0.0);
            (sig, vecs, n_h.max(n_tr) as f64 * f64::EPSILON * smax)
        }
        PodMethod::Gram => {
            let gram: DMatrix<f64> = f.tr_mul(&f);
            let eig = gram.symmetric_eigen();
            let mut order: Vec<usize> = (0..n_tr).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
            let sig: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0).sqrt()).collect();
            let vecs: Vec<Vec<f64>> = order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).iter().cloned().collect())
                .collect();
            let smax = sig.first().cloned().unwrap_or(0.0);
            // eigenvalue round-off ~ eps·σ_max², i.e. ~ sqrt(eps)·σ_max in σ
            (sig, vecs, (n_tr as f64 * f64::EPSILON).sqrt() * smax)
        }
    };
    let rank = sigmas.iter().take_while(|&&s| s > rank_tol && s > 0.0).count();

    let mut basis = ReducedBasis::new(SpaceSpec::l2(), n_h, BasisKind::Pod);
    let mut trace = Trace::default();
    trace.notes.push(format!(
        "pod method: {}",
        match method {
            PodMethod::Svd => "svd",
            PodMethod::Gram => "gram",
        }
    ));
    if m > rank {
        trace.notes.push(format!(
            "requested {m} modes but the snapshot matrix has numerical rank {rank}; truncated"
        ));
    }
    for k in 0..m.min(rank) {
        let sigma = sigmas[k];
        let mut u = match method {
            PodMethod::Svd => vectors[k].clone(),
            PodMethod::Gram => {
                let v = nalgebra::DVector::from_column_slice(&vectors[k]);
                let fu = f * v;
                fu.iter().map(|x| x / sigma).collect()
            }
        };
        let nu = SpaceSpec::l2().norm(&u);
        let peak = crate::space::peak_index(&u);
        let sign = if u[peak] < 0.0 { -1.0 } else { 1.0 };
        for x in u.iter_mut() {
            *x *= sign / nu;
        }
        basis.push(u)?;
        basis.scores.push(sigma);
        trace.records.push(TraceRecord {
            iteration: k + 1,
            selected: None,
            score: sigma,
            cputime_s: clock.elapsed(),
        });
    }
    Ok((basis, trace, method))
}
