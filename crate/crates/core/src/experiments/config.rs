use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::algorithms::GreedyConfig;
use crate::error::{ConfigIssue, Error, Result};
use crate::families::{Family, GridSpec, NoiseMode, NoiseSpec};
use crate::space::SpaceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nga,
    Oga,
    Eim,
    Pod,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Nga => "nga",
            Algorithm::Oga => "oga",
            Algorithm::Eim => "eim",
            Algorithm::Pod => "pod",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Binary,
}

/// Where the training set comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// A parametric family on its default grid, on `grid`, or on the full
    /// domain with the given point counts.
    Family {
        family: Family,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<GridSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spatial: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parametric: Option<Vec<usize>>,
    },
    /// Random combinations of `d` Gaussian vectors; the seed defaults to
    /// the experiment seed.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        n_h: usize,
        d: usize,
        n_tr: usize,
    },
    File {
        path: PathBuf,
        format: FileFormat,
    },
    /// The ℓ1 set on which natural greedy residuals grow; `target` is the
    /// threshold `M(α)` to force.
    Counterexample {
        eps: f64,
        #[serde(default = "default_ce_target")]
        target: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
}

fn default_ce_target() -> usize {
    8
}

impl SourceSpec {
    pub fn family(&self) -> Option<Family> {
        match self {
            SourceSpec::Family { family, .. } => Some(*family),
            _ => None,
        }
    }

    /// The sampling grid of a family source.
    pub fn grid(&self) -> Option<GridSpec> {
        match self {
            SourceSpec::Family {
                family,
                grid,
                spatial,
                parametric,
            } => Some(match grid {
                Some(g) => g.clone(),
                None => {
                    let def = family.default_grid();
                    let counts = |axes: &[crate::families::Axis]| axes.iter().map(|a| a.count).collect::<Vec<_>>();
                    family.grid_with(
                        spatial.as_deref().unwrap_or(&counts(&def.spatial)),
                        parametric.as_deref().unwrap_or(&counts(&def.parametric)),
                    )
                }
            }),
            _ => None,
        }
    }

    /// `(N_h, N_tr)` when known without loading anything.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            SourceSpec::Family { .. } => self.grid().map(|g| (g.n_h(), g.n_tr())),
            SourceSpec::Random { n_h, n_tr, .. } => Some((*n_h, *n_tr)),
            SourceSpec::File { .. } => None,
            SourceSpec::Counterexample { target, size, .. } => {
                let s = size.unwrap_or(target + 4);
                Some((s + 1, s + 1))
            }
        }
    }
}

/// Scaling applied to reported errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorWeight {
    /// `measure` for family sources, `unit` otherwise.
    #[default]
    Auto,
    /// Plain coordinate norms.
    Unit,
    /// Discrete Lp norms with the uniform weight `|Ω| / N_h`, i.e. errors
    /// scaled by `(|Ω| / N_h)^{1/p}`.
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormTableSpec {
    /// Basis whose projectors are measured.
    #[serde(default = "default_norm_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_norm_algorithm() -> Algorithm {
    Algorithm::Nga
}

fn default_dims() -> Vec<usize> {
    vec![5, 10, 15, 20, 25, 30]
}

fn default_restarts() -> usize {
    64
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Svg, OutputFormat::Json]
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub space: SpaceSpec,
    pub algorithms: Vec<Algorithm>,
    /// Largest basis size.
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default = "default_stride")]
    pub eval_stride: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    /// Constructor settings; `max_iterations` is replaced by `M`.
    #[serde(default)]
    pub greedy: GreedyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opnorm: Option<NormTableSpec>,
    #[serde(default)]
    pub error_weight: ErrorWeight,
    /// Tolerance of the error-evaluation distance solves.
    #[serde(default = "default_eval_tol")]
    pub eval_tol: f64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_stride() -> usize {
    3
}

fn default_eval_tol() -> f64 {
    1e-10
}

fn issue(path: impl Into<String>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            Error::Config(vec![issue(path, e.into_inner().to_string())])
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Greedy settings with `max_iterations = M`.
    pub fn greedy_config(&self) -> GreedyConfig {
        GreedyConfig {
            max_iterations: self.m,
            ..self.greedy.clone()
        }
    }

    /// Every semantic problem, not just the first.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        if self.algorithms.is_empty() {
            out.push(issue("algorithms", "at least one algorithm is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, a) in self.algorithms.iter().enumerate() {
            if !seen.insert(*a) {
                out.push(issue(format!("algorithms[{i}]"), format!("'{a}' listed twice")));
            }
        }
        if self.m == 0 {
            out.push(issue("M", "must be at least 1"));
        }
        if self.eval_stride == 0 {
            out.push(issue("eval_stride", "must be at least 1"));
        }
        if !(self.eval_tol > 0.0) {
            out.push(issue("eval_tol", "must be positive"));
        }
        if let Err(e) = self.greedy_config().validate() {
            out.push(issue("greedy", strip(&e)));
        }
        self.source_issues(&mut out);
        if let (Some((n_h, n_tr)), true) = (self.source.shape(), self.algorithms.contains(&Algorithm::Pod)) {
            if self.m > n_h.min(n_tr) {
                out.push(issue("M", format!("pod needs M <= min(N_h, N_tr) = {}", n_h.min(n_tr))));
            }
        }
        if let Some(noise) = &self.noise {
            match noise.mode {
                NoiseMode::CoordinateFraction => {
                    if !(0.0..=1.0).contains(&noise.fraction) {
                        out.push(issue("noise.fraction", "must lie in [0, 1]"));
                    } else if let Some((n_h, n_tr)) = self.source.shape() {
                        if noise.fraction > 0.0 && noise.count(n_h, n_tr) == 0 {
                            out.push(issue("noise.fraction", "selects no coordinate of this training set"));
                        }
                    }
                }
                NoiseMode::IndicatorShift => {
                    let one_d = self
                        .source
                        .grid()
                        .is_some_and(|g| g.spatial.len() == 1 && g.parametric.len() == 1);
                    if !one_d {
                        out.push(issue(
                            "noise.mode",
                            "indicator_shift needs a one-dimensional family source",
                        ));
                    }
                }
            }
        }
        if let Some(op) = &self.opnorm {
            if !self.algorithms.contains(&op.algorithm) {
                out.push(issue(
                    "opnorm.algorithm",
                    format!("'{}' is not among the algorithms", op.algorithm),
                ));
            }
            if op.dims.is_empty() {
                out.push(issue("opnorm.dims", "must not be empty"));
            }
            for (i, &n) in op.dims.iter().enumerate() {
                if n == 0 || n > self.m {
                    out.push(issue(
                        format!("opnorm.dims[{i}]"),
                        format!("{n} outside 1..={}", self.m),
                    ));
                }
            }
        }
        if self.output.formats.is_empty() {
            out.push(issue("output.formats", "must not be empty"));
        }
        out
    }

    fn source_issues(&self, out: &mut Vec<ConfigIssue>) {
        match &self.source {
            SourceSpec::Family {
                family,
                grid,
                spatial,
                parametric,
            } => {
                if grid.is_some() && (spatial.is_some() || parametric.is_some()) {
                    out.push(issue("source.grid", "give either grid or spatial/parametric counts"));
                    return;
                }
                let (sd, pd) = (family.spatial_domain(), family.parameter_domain());
                for (name, counts, len) in [("spatial", spatial, sd.len()), ("parametric", parametric, pd.len())] {
                    if let Some(c) = counts {
                        if c.len() != len {
                            out.push(issue(
                                format!("source.{name}"),
                                format!("family {family} needs {len} counts"),
                            ));
                        }
                        if c.contains(&0) {
                            out.push(issue(format!("source.{name}"), "counts must be positive"));
                        }
                    }
                }
                if let Some(g) = grid {
                    if g.spatial.len() != sd.len() || g.parametric.len() != pd.len() {
                        out.push(issue(
                            "source.grid",
                            format!("wrong number of axes for family {family}"),
                        ));
                    }
                    for (name, axes, dom) in [("spatial", &g.spatial, &sd), ("parametric", &g.parametric, &pd)] {
                        for (k, (a, &(lo, hi))) in axes.iter().zip(dom.iter()).enumerate() {
                            if a.count == 0 || !(lo <= a.min && a.min <= a.max && a.max <= hi) {
                                out.push(issue(
                                    format!("source.grid.{name}[{k}]"),
                                    format!("needs a positive count and lo <= min <= max <= hi within [{lo}, {hi}]"),
                                ));
                            }
                        }
                    }
                }
            }
            SourceSpec::Random { n_h, d, n_tr, .. } => {
                if *n_h == 0 || *d == 0 || *n_tr == 0 {
                    out.push(issue("source", "n_h, d and n_tr must be positive"));
                }
                if d > n_h {
                    out.push(issue("source.d", "must not exceed n_h"));
                }
            }
            SourceSpec::File { path, .. } => {
                if path.as_os_str().is_empty() {
                    out.push(issue("source.path", "must not be empty"));
                }
            }
            SourceSpec::Counterexample { eps, target, size } => {
                if !(*eps > 0.0 && *eps < 0.5) {
                    out.push(issue("source.eps", "must lie in (0, 1/2)"));
                }
                if *target == 0 {
                    out.push(issue("source.target", "must be at least 1"));
                }
                if size.is_some_and(|s| s <= *target) {
                    out.push(issue("source.size", "must exceed target"));
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Domain(m) | Error::Range(m) => m.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "source": {"kind": "random", "n_h": 40, "d": 5, "n_tr": 30},
        "space": 2,
        "algorithms": ["nga", "oga"],
        "M": 6
    }"#;

    #[test]
    fn minimal_config_round_trips() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.eval_stride, 3);
        assert_eq!(cfg.greedy_config().max_iterations, 6);
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_key_reports_path() {
        let text = MINIMAL.replace("\"d\": 5", "\"d\": 5, \"bogus\": 1");
        let Err(Error::Config(issues)) = ExperimentConfig::from_json(&text) else {
            panic!("expected config error");
        };
        assert_eq!(issues[0].path, "source");
        assert!(issues[0].message.contains("bogus"));
    }

    #[test]
    fn semantic_issues_are_enumerated() {
        let text = MINIMAL
            .replace("[\"nga\", \"oga\"]", "[]")
            .replace("\"M\": 6", "\"M\": 0");
        let Err(Error::Config(issues)) = ExperimentConfig::from_json(&text) else {
            panic!("expected config error");
        };
        let paths: Vec<_> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"algorithms") && paths.contains(&"M"), "{paths:?}");
    }

    #[test]
    fn family_grid_defaults() {
        let text = r#"{
            "source": {"kind": "family", "family": "1d", "spatial": [2000], "parametric": [100]},
            "space": "inf", "algorithms": ["eim"], "M": 15
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.source.shape(), Some((2000, 100)));
        let full = r#"{"source": {"kind": "family", "family": "3d"}, "space": 1, "algorithms": ["nga"], "M": 3}"#;
        let cfg = ExperimentConfig::from_json(full).unwrap();
        assert_eq!(cfg.source.shape(), Some((125_000, 512)));
    }

    #[test]
    fn pod_size_and_noise_checks() {
        let text = MINIMAL
            .replace("\"nga\", \"oga\"", "\"pod\"")
            .replace("\"M\": 6", "\"M\": 31");
        assert!(ExperimentConfig::from_json(&text).is_err());
        let text = MINIMAL.replace("\"M\": 6", "\"M\": 6, \"noise\": {\"mode\": \"indicator_shift\"}");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }
}
