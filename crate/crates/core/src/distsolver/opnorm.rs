//! Lower-bound estimates of projector norms restricted to `V_n`.
//!
//! On `V_n = span{g_0..g_{n-1}}` the NGA projector acts coefficient-wise:
//! `R_m(Σ α_k g_k) = Σ_{k≥m} α_k g_k`, and the partial-sum projector is
//! `S_m = I − R_m`. Their norms are maxima of ratios
//! `‖Σ_{k∈S} α_k g_k‖ / ‖Σ_{k<n} α_k g_k‖`, which are non-convex in `α`; we
//! take the best of seeded random samples and multistart projected gradient
//! ascent, so every returned value is attained and hence a lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dot, RowMatrix};
use crate::error::{Error, Result};
use crate::projector::ReducedBasis;
use crate::rng::{self, Gaussian, STREAM_RESTARTS, STREAM_SAMPLES};
use crate::space::SpaceSpec;

const ASCENT_MAX_ITER: usize = 100;
const ASCENT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpNormOptions {
    pub restarts: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for OpNormOptions {
    fn default() -> Self {
        OpNormOptions {
            restarts: 64,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpNormResult {
    pub value: f64,
    /// Coefficients in `g_0..g_{n-1}` attaining `value`.
    pub argmax_coeffs: Vec<f64>,
    pub restarts_used: usize,
}

/// Which coefficients survive in the numerator.
#[derive(Debug, Clone, Copy)]
enum Part {
    /// `R_m`: indices `m..n`.
    Tail(usize),
    /// `S_m`: indices `0..m`.
    Head(usize),
}

impl Part {
    fn keeps(&self, k: usize) -> bool {
        match *self {
            Part::Tail(m) => k >= m,
            Part::Head(m) => k < m,
        }
    }
}

struct Ratio {
    g: RowMatrix,
    space: SpaceSpec,
    part: Part,
}

impl Ratio {
    fn value(&self, alpha: &[f64]) -> f64 {
        let masked = self.masked(alpha);
        let den = self.space.norm(&self.g.mul(alpha));
        if den == 0.0 {
            return 0.0;
        }
        self.space.norm(&self.g.mul(&masked)) / den
    }

    fn masked(&self, alpha: &[f64]) -> Vec<f64> {
        alpha
            .iter()
            .enumerate()
            .map(|(k, a)| if self.part.keeps(k) { *a } else { 0.0 })
            .collect()
    }

    /// Value and a (sub)gradient.
    fn value_grad(&self, alpha: &[f64]) -> (f64, Vec<f64>) {
        let a = self.g.mul(alpha);
        let b = self.g.mul(&self.masked(alpha));
        let (na, nb) = (self.space.norm(&a), self.space.norm(&b));
        let n = alpha.len();
        if na == 0.0 || nb == 0.0 {
            return (if na == 0.0 { 0.0 } else { nb / na }, vec![0.0; n]);
        }
        let dense = |x: &[f64]| {
            let mut w = vec![0.0; x.len()];
            if let Ok(fx) = self.space.norming_functional(x) {
                fx.add_scaled_to(1.0, &mut w);
            }
            w
        };
        let ga = self.g.tmul(&dense(&a));
        let mut gb = self.g.tmul(&dense(&b));
        for (k, v) in gb.iter_mut().enumerate() {
            if !self.part.keeps(k) {
                *v = 0.0;
            }
        }
        let phi = nb / na;
        let grad = gb.iter().zip(&ga).map(|(x, y)| (x - phi * y) / na).collect();
        (phi, grad)
    }

    fn ascend(&self, mut alpha: Vec<f64>) -> (f64, Vec<f64>) {
        normalize(&mut alpha);
        let (mut phi, mut grad) = self.value_grad(&alpha);
        let mut step = 0.5;
        for _ in 0..ASCENT_MAX_ITER {
            let gn = dot(&grad, &grad).sqrt();
            if gn == 0.0 {
                break;
            }
            let mut improved = None;
            for _ in 0..40 {
                let mut cand: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a + step * g / gn).collect();
                normalize(&mut cand);
                let v = self.value(&cand);
                if v > phi {
                    improved = Some((cand, v));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, v)) = improved else { break };
            let gain = v - phi;
            alpha = cand;
            let vg = self.value_grad(&alpha);
            phi = vg.0.max(v);
            grad = vg.1;
            step = (step * 2.0).min(1.0);
            if gain <= ASCENT_REL_TOL * phi {
                break;
            }
        }
        (phi, alpha)
    }
}

fn normalize(a: &mut [f64]) {
    let n = dot(a, a).sqrt();
    if n > 0.0 {
        for v in a.iter_mut() {
            *v /= n;
        }
    }
}

fn check(basis: &ReducedBasis, m: usize, n: usize) -> Result<()> {
    if n > basis.len() {
        return Err(Error::range(format!(
            "subspace dimension {n} exceeds the basis size {}",
            basis.len()
        )));
    }
    if m >= n {
        return Err(Error::range(format!("need m < n, got m = {m}, n = {n}")));
    }
    Ok(())
}

fn search(basis: &ReducedBasis, n: usize, part: Part, opts: &OpNormOptions) -> OpNormResult {
    let cols: Vec<&[f64]> = basis.vectors()[..n].iter().map(|v| v.as_slice()).collect();
    let ratio = Ratio {
        g: RowMatrix::from_columns(&cols, basis.dim()),
        space: basis.space(),
        part,
    };
    // a unit vector inside the surviving block has ratio exactly 1
    let mut e = vec![0.0; n];
    match part {
        Part::Tail(_) => e[n - 1] = 1.0,
        Part::Head(_) => e[0] = 1.0,
    }
    let mut best = (ratio.value(&e), e);

    let mut gauss = Gaussian::new(rng::stream(opts.seed, STREAM_SAMPLES));
    for _ in 0..opts.samples {
        let a: Vec<f64> = (0..n).map(|_| gauss.sample()).collect();
        let v = ratio.value(&a);
        if v > best.0 {
            best = (v, a);
        }
    }
    let runs: Vec<(f64, Vec<f64>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut g = Gaussian::new(rng::stream(opts.seed, STREAM_RESTARTS + r as u64));
            let start: Vec<f64> = (0..n).map(|_| g.sample()).collect();
            ratio.ascend(start)
        })
        .collect();
    for run in runs {
        if run.0 > best.0 {
            best = run;
        }
    }
    let mut coeffs = best.1;
    normalize(&mut coeffs);
    OpNormResult {
        value: best.0,
        argmax_coeffs: coeffs,
        restarts_used: opts.restarts,
    }
}

/// Estimate of `‖R_m‖` on `V_n`; exactly 1 for `m = 0`.
pub fn operator_norm(basis: &ReducedBasis, m: usize, n: usize, opts: &OpNormOptions) -> Result<OpNormResult> {
    check(basis, m, n)?;
    if m == 0 {
        let mut coeffs = vec![0.0; n];
        coeffs[0] = 1.0;
        return Ok(OpNormResult {
            value: 1.0,
            argmax_coeffs: coeffs,
            restarts_used: 0,
        });
    }
    Ok(search(basis, n, Part::Tail(m), opts))
}

/// `max_{0≤m<n} ‖R_m‖` on `V_n`, with the maximizing `m`.
pub fn max_operator_norm(basis: &ReducedBasis, n: usize, opts: &OpNormOptions) -> Result<(f64, usize)> {
    if n == 0 || n > basis.len() {
        return Err(Error::range(format!(
            "subspace dimension {n} outside 1..={}",
            basis.len()
        )));
    }
    let mut best = (1.0, 0);
    for m in 1..n {
        let r = operator_norm(basis, m, n, opts)?;
        if r.value > best.0 {
            best = (r.value, m);
        }
    }
    Ok(best)
}

/// Measured basis constant: `max_{1≤m<n} ‖S_m‖` on `V_n`, at least 1.
pub fn basis_constant(basis: &ReducedBasis, n: usize, opts: &OpNormOptions) -> Result<f64> {
    if n > basis.len() {
        return Err(Error::range(format!(
            "subspace dimension {n} exceeds the basis size {}",
            basis.len()
        )));
    }
    let mut best = 1.0f64;
    for m in 1..n {
        best = best.max(search(basis, n, Part::Head(m), opts).value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::BasisKind;

    fn orthonormal() -> ReducedBasis {
        let mut b = ReducedBasis::new(SpaceSpec::l2(), 4, BasisKind::Nga);
        b.push(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        b.push(vec![0.0, 0.6, 0.8, 0.0]).unwrap();
        b.push(vec![0.0, 0.8, -0.6, 0.0]).unwrap();
        b
    }

    fn quick() -> OpNormOptions {
        OpNormOptions {
            restarts: 8,
            samples: 200,
            seed: 3,
        }
    }

    #[test]
    fn orthonormal_projector_norm_is_one() {
        let b = orthonormal();
        for m in 0..3 {
            let r = operator_norm(&b, m, 3, &quick()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "m={m}: {}", r.value);
        }
        assert!((basis_constant(&b, 3, &quick()).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_vector_and_range_errors() {
        let b = orthonormal();
        assert_eq!(basis_constant(&b, 1, &quick()).unwrap(), 1.0);
        assert!(matches!(operator_norm(&b, 2, 2, &quick()), Err(Error::Range(_))));
        assert!(matches!(operator_norm(&b, 0, 4, &quick()), Err(Error::Range(_))));
    }

    #[test]
    fn oblique_pair() {
        // g_0 = e_0, g_1 = (cos θ, sin θ): ‖R_1‖ = 1 / sin θ in l2
        let theta: f64 = 0.3;
        let mut b = ReducedBasis::new(SpaceSpec::l2(), 2, BasisKind::Nga);
        b.push(vec![1.0, 0.0]).unwrap();
        b.push(vec![theta.cos(), theta.sin()]).unwrap();
        let r = operator_norm(&b, 1, 2, &quick()).unwrap();
        assert!((r.value - 1.0 / theta.sin()).abs() < 1e-6);
    }
}
