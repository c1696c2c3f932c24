//! Experiment orchestration: build a training set, run the requested
//! constructors, measure best-approximation errors, CPU time and quality,
//! and write reports.

mod config;
mod report;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    Algorithm, ErrorWeight, ExperimentConfig, FileFormat, NormTableSpec, OutputFormat, OutputSpec, SourceSpec,
};
pub use report::{
    errors_csv, normtable_csv, selection_csv, svg_chart, write_report, Metric, ERRORS_HEADER, NORMTABLE_HEADER,
    SELECTION_HEADER,
};

use crate::algorithms::{run_eim, run_nga, run_oga, run_pod, GreedyConfig, Trace, TrainingSet};
use crate::distsolver::{max_operator_norm, DistanceSolver, OpNormOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::families::{self, NoiseSpec};
use crate::projector::ReducedBasis;
use crate::snapshot_io;
use crate::space::{Exponent, SpaceSpec};
use crate::theory::r_power_bound;

/// Mean and maximum best-approximation error over a training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub avg: f64,
    pub max: f64,
    /// Solves that stopped at their iteration cap (values are upper bounds).
    pub capped: usize,
}

/// `dist(f, span(g_0..g_{m-1}))` in the training set's space for every
/// snapshot.
pub fn distances(ts: &TrainingSet, basis: &ReducedBasis, m: usize, tol: f64) -> Result<Vec<(f64, SolveStatus)>> {
    if m > basis.len() {
        return Err(Error::range(format!("m = {m} exceeds the basis size {}", basis.len())));
    }
    let solver = DistanceSolver::new(&basis.vectors()[..m], ts.n_h(), ts.space, tol)?;
    (0..ts.n_tr())
        .into_par_iter()
        .map(|i| solver.solve(ts.column(i)).map(|r| (r.dist, r.status)))
        .collect()
}

pub fn evaluate_errors(ts: &TrainingSet, basis: &ReducedBasis, m: usize, tol: f64) -> Result<ErrorStats> {
    let d = distances(ts, basis, m, tol)?;
    let sum: f64 = d.iter().map(|x| x.0).sum();
    Ok(ErrorStats {
        avg: sum / d.len() as f64,
        max: d.iter().fold(0.0, |a, x| a.max(x.0)),
        capped: d.iter().filter(|x| x.1 == SolveStatus::MaxIter).count(),
    })
}

/// `1 / (error · cputime)`; `+∞` for a zero error.
pub fn quality(error: f64, cputime_s: f64) -> f64 {
    1.0 / (error * cputime_s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub algorithm: Algorithm,
    pub m: usize,
    pub error_avg: f64,
    pub error_max: f64,
    pub cputime_s: f64,
    pub quality_avg: f64,
    pub quality_min: f64,
}

/// What one constructor produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub basis_len: usize,
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
    /// Interpolation points (EIM, and NGA at `p = ∞`).
    pub points: Option<Vec<usize>>,
    pub notes: Vec<String>,
    /// Error-evaluation solves that hit their iteration cap.
    pub capped_solves: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub n: usize,
    pub measured_max_norm: f64,
    /// The `m` attaining the measured maximum.
    pub argmax_m: usize,
    /// `R^{(n−1)/2}` with the Hilbert-space smoothness constant.
    pub theoretical_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    pub seed: u64,
    pub n_h: usize,
    pub n_tr: usize,
    /// Factor applied to every reported error.
    pub error_scale: f64,
    pub timing: bool,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub runs: Vec<AlgorithmRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_rows: Option<Vec<NormRow>>,
    pub metadata: Metadata,
}

impl ExperimentReport {
    /// Zeroes CPU times and qualities so that reports of identical runs
    /// compare byte for byte.
    pub fn strip_timing(&mut self) {
        for r in &mut self.rows {
            r.cputime_s = 0.0;
            r.quality_avg = 0.0;
            r.quality_min = 0.0;
        }
        self.metadata.timing = false;
    }

    pub fn failed(&self) -> bool {
        self.runs.iter().any(|r| r.failure.is_some())
    }

    pub fn rows_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }
}

/// Builds the configured training set (noise included) and returns it with
/// the error scale factor.
pub fn build_training_set(cfg: &ExperimentConfig) -> Result<(TrainingSet, f64)> {
    let space = cfg.space;
    let mut ts = match &cfg.source {
        SourceSpec::Family { family, .. } => {
            let grid = cfg.source.grid().expect("family source has a grid");
            families::sample_family(*family, &grid, space)?
        }
        SourceSpec::Random { seed, n_h, d, n_tr } => {
            families::gen_random_set(seed.unwrap_or(cfg.seed), *n_h, *d, *n_tr, space)?
        }
        SourceSpec::File { path, format } => {
            let mut ts = match format {
                FileFormat::Csv => snapshot_io::read_csv(path, space)?,
                FileFormat::Binary => snapshot_io::read_binary(path)?,
            };
            ts.space = space;
            ts
        }
        SourceSpec::Counterexample { eps, target, size } => {
            let size = size.unwrap_or(target + 4);
            let a = families::counterexample_default_a(size);
            let alpha = families::counterexample_alpha(*eps, &a, *target)?;
            let mut ts = families::counterexample_set(*eps, &a, alpha, size)?.set;
            ts.space = space;
            ts
        }
    };
    if let Some(noise) = &cfg.noise {
        let spec = NoiseSpec {
            seed: Some(noise.seed.unwrap_or(cfg.seed)),
            ..*noise
        };
        ts = families::add_noise(&ts, &spec)?;
    }
    let measure = match cfg.error_weight {
        ErrorWeight::Unit => false,
        ErrorWeight::Measure => true,
        ErrorWeight::Auto => cfg.source.family().is_some(),
    };
    let scale = match (&ts.grid, measure) {
        (Some(grid), true) => match space.exponent() {
            Exponent::Infinity => 1.0,
            _ => (grid.spatial_measure() / ts.n_h() as f64).powf(1.0 / space.p()),
        },
        (None, true) => {
            return Err(Error::Config(vec![crate::error::ConfigIssue {
                path: "error_weight".into(),
                message: "measure weighting needs a family source".into(),
            }]))
        }
        _ => 1.0,
    };
    Ok((ts, scale))
}

/// Runs one constructor. EIM is always built in ℓ∞; the training set is
/// borrowed mutably only to switch its space for that call.
pub fn construct(algorithm: Algorithm, ts: &mut TrainingSet, cfg: &GreedyConfig) -> Result<(ReducedBasis, Trace)> {
    match algorithm {
        Algorithm::Nga => run_nga(ts, cfg),
        Algorithm::Oga => run_oga(ts, cfg),
        Algorithm::Eim => {
            let original = ts.space;
            ts.space = SpaceSpec::linf();
            let out = run_eim(ts, cfg);
            ts.space = original;
            out
        }
        Algorithm::Pod => run_pod(ts, cfg.max_iterations),
    }
}

/// `max_{0≤m<n} ‖R_m‖` on `V_n` for each requested `n`.
pub fn norm_table(basis: &ReducedBasis, dims: &[usize], opts: &OpNormOptions) -> Result<Vec<NormRow>> {
    dims.iter()
        .map(|&n| {
            let (value, m) = max_operator_norm(basis, n, opts)?;
            Ok(NormRow {
                n,
                measured_max_norm: value,
                argmax_m: m,
                theoretical_bound: r_power_bound(n, SpaceSpec::l2())?,
            })
        })
        .collect()
}

/// One row of the counterexample demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub m: usize,
    /// `‖R_m(f_*)‖₁ / ‖f_*‖₁` on the NGA basis.
    pub measured: f64,
    /// `(2(1 − ε))^m`.
    pub predicted: f64,
}

/// Builds the ℓ1 counterexample with `M(α) = target`, runs the NGA for
/// `target` steps and measures the growth of the remainder of `f_*`.
pub fn counterexample_growth(
    eps: f64,
    target: usize,
    size: Option<usize>,
) -> Result<(families::Counterexample, Vec<GrowthRow>)> {
    let size = size.unwrap_or(target + 4);
    let a = families::counterexample_default_a(size);
    let alpha = families::counterexample_alpha(eps, &a, target)?;
    let ce = families::counterexample_set(eps, &a, alpha, size)?;
    let cfg = GreedyConfig {
        max_iterations: target,
        ..Default::default()
    };
    let (basis, _) = run_nga(&ce.set, &cfg)?;
    let f_star = ce.set.column(0);
    let norm = SpaceSpec::l1().norm(f_star);
    let mut rows = Vec::with_capacity(basis.len());
    for m in 1..=basis.len() {
        let r = crate::projector::apply_r(f_star, &basis, m)?;
        rows.push(GrowthRow {
            m,
            measured: SpaceSpec::l1().norm(&r) / norm,
            predicted: (2.0 * (1.0 - eps)).powi(m as i32),
        });
    }
    Ok((ce, rows))
}

fn rows_for_run(
    algorithm: Algorithm,
    ts: &TrainingSet,
    basis: &ReducedBasis,
    trace: &Trace,
    cfg: &ExperimentConfig,
    scale: f64,
) -> Result<(Vec<ReportRow>, usize)> {
    let top = cfg.m.min(basis.len());
    let mut rows = Vec::new();
    let mut capped = 0;
    for m in (cfg.eval_stride..=top).step_by(cfg.eval_stride) {
        let stats = evaluate_errors(ts, basis, m, cfg.eval_tol)?;
        capped += stats.capped;
        let t = trace.cputime_at(m).unwrap_or(0.0);
        let (avg, max) = (stats.avg * scale, stats.max * scale);
        rows.push(ReportRow {
            algorithm,
            m,
            error_avg: avg,
            error_max: max,
            cputime_s: t,
            quality_avg: quality(avg, t),
            quality_min: quality(max, t),
        });
    }
    Ok((rows, capped))
}

/// Runs the whole protocol. Failures of individual constructors are
/// recorded in their [`AlgorithmRun`] and do not abort the others.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (mut ts, scale) = build_training_set(cfg)?;
    if cfg.algorithms.contains(&Algorithm::Pod) && cfg.m > ts.n_h().min(ts.n_tr()) {
        return Err(Error::Config(vec![crate::error::ConfigIssue {
            path: "M".into(),
            message: format!("pod needs M <= min(N_h, N_tr) = {}", ts.n_h().min(ts.n_tr())),
        }]));
    }
    let gcfg = cfg.greedy_config();
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut norm_rows = None;
    for &algorithm in &cfg.algorithms {
        let mut run = AlgorithmRun {
            algorithm,
            basis_len: 0,
            selected: Vec::new(),
            scores: Vec::new(),
            points: None,
            notes: Vec::new(),
            capped_solves: 0,
            failure: None,
        };
        let built = construct(algorithm, &mut ts, &gcfg);
        let (basis, trace) = match built {
            Ok(bt) => bt,
            Err(e) => {
                run.failure = Some(e.to_string());
                runs.push(run);
                continue;
            }
        };
        run.basis_len = basis.len();
        run.selected = basis.selected.clone();
        run.scores = trace.scores();
        run.points = basis.points.clone();
        run.notes = trace.notes.clone();
        match rows_for_run(algorithm, &ts, &basis, &trace, cfg, scale) {
            Ok((r, capped)) => {
                rows.extend(r);
                run.capped_solves = capped;
            }
            Err(e) => run.failure = Some(e.to_string()),
        }
        if let Some(op) = cfg.opnorm.as_ref().filter(|op| op.algorithm == algorithm) {
            let dims: Vec<usize> = op.dims.iter().copied().filter(|&n| n <= basis.len()).collect();
            if dims.len() < op.dims.len() {
                run.notes
                    .push(format!("norm table limited to n <= {} (basis size)", basis.len()));
            }
            let opts = OpNormOptions {
                restarts: op.restarts,
                samples: op.samples,
                seed: cfg.seed,
            };
            match norm_table(&basis, &dims, &opts) {
                Ok(r) => norm_rows = Some(r),
                Err(e) => run.failure = Some(format!("norm table: {e}")),
            }
        }
        runs.push(run);
    }
    if runs.iter().all(|r| r.failure.is_some()) {
        let msg: Vec<String> = runs
            .iter()
            .map(|r| format!("{}: {}", r.algorithm, r.failure.as_deref().unwrap_or("")))
            .collect();
        return Err(Error::Iteration {
            iteration: 0,
            index: 0,
            reason: format!("every algorithm failed ({})", msg.join("; ")),
        });
    }
    Ok(ExperimentReport {
        rows,
        runs,
        norm_rows,
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            n_h: ts.n_h(),
            n_tr: ts.n_tr(),
            error_scale: scale,
            timing: true,
            config: cfg.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::gen_random_set;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn counterexample_growth_is_geometric() {
        let (ce, rows) = counterexample_growth(0.25, 8, None).unwrap();
        assert_eq!(ce.threshold, Some(8));
        assert_eq!(rows.len(), 8);
        for r in rows {
            assert!((r.measured / r.predicted - 1.0).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn quality_examples() {
        assert_eq!(quality(0.5, 2.0), 1.0);
        assert!((quality(1e-3, 10.0) - 100.0).abs() < 1e-9);
        assert_eq!(quality(0.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn zero_dimensional_errors_are_norms() {
        let ts = gen_random_set(1, 10, 3, 8, SpaceSpec::l1()).unwrap();
        let (basis, _) = run_nga(&ts, &GreedyConfig::default()).unwrap();
        let e = evaluate_errors(&ts, &basis, 0, 1e-10).unwrap();
        let max = ts.columns().map(|c| SpaceSpec::l1().norm(c)).fold(0.0, f64::max);
        assert_eq!(e.max, max);
        let full = evaluate_errors(&ts, &basis, basis.len(), 1e-10).unwrap();
        assert!(full.max < 1e-9);
        assert!(evaluate_errors(&ts, &basis, basis.len() + 1, 1e-10).is_err());
    }

    #[test]
    fn run_small_experiment() {
        let c = cfg(r#"{
            "source": {"kind": "random", "n_h": 60, "d": 12, "n_tr": 40},
            "space": 2, "algorithms": ["nga", "oga", "pod"], "M": 9, "seed": 5,
            "opnorm": {"dims": [3, 6], "restarts": 4, "samples": 100}
        }"#);
        let mut rep = run_experiment(&c).unwrap();
        assert_eq!(rep.rows.len(), 9);
        assert_eq!(rep.runs[0].selected, rep.runs[1].selected);
        for r in &rep.rows {
            assert!(r.error_avg <= r.error_max);
            assert!(r.cputime_s > 0.0);
        }
        let norms = rep.norm_rows.as_ref().unwrap();
        assert!(norms.iter().all(|r| (r.measured_max_norm - 1.0).abs() < 1e-6));
        rep.strip_timing();
        assert!(rep.rows.iter().all(|r| r.cputime_s == 0.0));
    }

    #[test]
    fn pod_size_is_checked_for_file_sources() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let ts = gen_random_set(1, 6, 2, 4, SpaceSpec::l2()).unwrap();
        snapshot_io::write_binary(&ts, &path).unwrap();
        let text = format!(
            r#"{{"source": {{"kind": "file", "path": {:?}, "format": "binary"}}, "space": 2, "algorithms": ["pod"], "M": 5}}"#,
            path.to_str().unwrap()
        );
        assert!(matches!(run_experiment(&cfg(&text)), Err(Error::Config(_))));
    }

    #[test]
    fn measure_weight_scales_errors() {
        let base = r#"{"source": {"kind": "family", "family": "1d", "spatial": [401], "parametric": [20]},
                      "space": 1, "algorithms": ["nga"], "M": 3, "error_weight": "WEIGHT"}"#;
        let unit = run_experiment(&cfg(&base.replace("WEIGHT", "unit"))).unwrap();
        let meas = run_experiment(&cfg(&base.replace("WEIGHT", "measure"))).unwrap();
        let ratio = meas.rows[0].error_avg / unit.rows[0].error_avg;
        assert!((ratio - 2.0 / 401.0).abs() < 1e-12);
        assert_eq!(meas.metadata.error_scale, 2.0 / 401.0);
    }
}
