//! Norms, norming functionals and smoothness constants of finite-dimensional
//! ℓp spaces.
//!
//! A norming functional of a non-zero `x` is a unit-norm dual element `F_x`
//! with `F_x(x) = ‖x‖`. For `1 < p < ∞` it is unique (the Gâteaux derivative
//! of the norm at `x`); for `p = 1` and `p = ∞` we fix one choice:
//!
//! * `p = 1`: `F_x(y) = Σ sgn(x_i) y_i`, with `sgn(0) = 0`;
//! * `p = ∞`: `F_x(y) = sgn(x_m) y_m` where `m` is the lowest index with
//!   `|x_m| = ‖x‖_∞`.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The exponent `p` of an ℓp space, keeping `1` and `∞` exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    One,
    /// `1 < p < ∞`.
    Finite(f64),
    Infinity,
}

/// Selects the norm and the norming-functional family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceSpec {
    p: Exponent,
}

impl SpaceSpec {
    /// Builds the space for a real exponent; `f64::INFINITY` selects ℓ∞.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::domain(format!("exponent p must be >= 1, got {p}")));
        }
        let p = if p == 1.0 {
            Exponent::One
        } else if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        };
        Ok(SpaceSpec { p })
    }

    pub fn l1() -> Self {
        SpaceSpec { p: Exponent::One }
    }

    pub fn l2() -> Self {
        SpaceSpec {
            p: Exponent::Finite(2.0),
        }
    }

    pub fn linf() -> Self {
        SpaceSpec { p: Exponent::Infinity }
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    /// `p` as a real number (`f64::INFINITY` for ℓ∞).
    pub fn p(&self) -> f64 {
        match self.p {
            Exponent::One => 1.0,
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == Exponent::Finite(2.0)
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.p, Exponent::Finite(_))
    }

    /// `|1/2 - 1/p|`, the exponent of the Banach–Mazur growth factor.
    pub fn hilbert_distance_exponent(&self) -> f64 {
        (0.5 - 1.0 / self.p()).abs()
    }

    /// The norm of `x`; zero for an empty slice.
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self.p {
            Exponent::One => x.iter().map(|v| v.abs()).sum(),
            Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(p) => {
                if p == 2.0 {
                    return scaled_l2(x);
                }
                let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                let sum: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
                scale * sum.powf(1.0 / p)
            }
        }
    }

    /// The norming functional of `x`, ready to be applied to many vectors.
    pub fn norming_functional(&self, x: &[f64]) -> Result<NormingFunctional> {
        if x.is_empty() {
            return Err(Error::domain("norming functional of an empty vector"));
        }
        let nx = self.norm(x);
        if nx == 0.0 || !nx.is_finite() {
            return Err(Error::domain("norming functional is undefined at the zero vector"));
        }
        Ok(match self.p {
            Exponent::One => NormingFunctional::Dense(x.iter().map(|&v| sgn(v)).collect()),
            Exponent::Infinity => {
                let index = peak_index(x);
                NormingFunctional::Peak {
                    index,
                    sign: sgn(x[index]),
                }
            }
            Exponent::Finite(p) => {
                if p == 2.0 {
                    NormingFunctional::Dense(x.iter().map(|&v| v / nx).collect())
                } else {
                    // sgn(x_i) |x_i|^{p-1} / ‖x‖^{p-1}, computed on x/‖x‖ to avoid overflow
                    NormingFunctional::Dense(x.iter().map(|&v| sgn(v) * (v.abs() / nx).powf(p - 1.0)).collect())
                }
            }
        })
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p {
            Exponent::One => write!(f, "1"),
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(SpaceSpec::linf());
        }
        let p: f64 = t.parse().map_err(|_| Error::parse(format!("invalid exponent {s:?}")))?;
        SpaceSpec::new(p)
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self.p {
            Exponent::Infinity => serializer.serialize_str("inf"),
            _ => serializer.serialize_f64(self.p()),
        }
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => SpaceSpec::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A dual element of ℓp in a form that is cheap to apply repeatedly.
#[derive(Debug, Clone, PartialEq)]
pub enum NormingFunctional {
    /// `F(y) = Σ w_i y_i`.
    Dense(Vec<f64>),
    /// `F(y) = sign · y[index]` (the ℓ∞ peak functional).
    Peak { index: usize, sign: f64 },
}

impl NormingFunctional {
    pub fn apply(&self, y: &[f64]) -> f64 {
        match self {
            NormingFunctional::Dense(w) => dot(w, y),
            NormingFunctional::Peak { index, sign } => sign * y[*index],
        }
    }

    /// Adds `scale · w` to `out`, where `w` is the dense representation.
    pub fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        match self {
            NormingFunctional::Dense(w) => {
                for (o, wi) in out.iter_mut().zip(w) {
                    *o += scale * wi;
                }
            }
            NormingFunctional::Peak { index, sign } => out[*index] += scale * sign,
        }
    }
}

/// A finite real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite coordinate {} at index {i}",
                coords[i]
            )));
        }
        Ok(Vector(coords))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `μ` solving `1 + μ = 2μ ρ(1/μ)` and `R = min(1 + μ, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessConstant {
    pub mu: f64,
    pub r: f64,
}

/// The ℓp norm of `x`.
pub fn norm(x: &[f64], space: SpaceSpec) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::domain("norm of an empty vector"));
    }
    Ok(space.norm(x))
}

/// `F_x(y)` for the norming functional of `x`.
pub fn norming_apply(x: &[f64], y: &[f64], space: SpaceSpec) -> Result<f64> {
    check_same_len(x, y)?;
    Ok(space.norming_functional(x)?.apply(y))
}

/// Central-difference derivative of the norm at `x` in direction `y`.
///
/// Only meaningful in the smooth regime `1 < p < ∞`; used to validate the
/// closed-form functionals.
pub fn gateaux_functional(x: &[f64], y: &[f64], space: SpaceSpec, h: f64) -> Result<f64> {
    if !space.is_smooth() {
        return Err(Error::Unsupported(format!(
            "norming functionals are not unique in l{space}"
        )));
    }
    check_same_len(x, y)?;
    if space.norm(x) == 0.0 {
        return Err(Error::domain("derivative of the norm at the zero vector"));
    }
    if !(h > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    let plus: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - h * b).collect();
    Ok((space.norm(&plus) - space.norm(&minus)) / (2.0 * h))
}

/// Power-type upper model of the modulus of smoothness.
pub fn modulus_rho(u: f64, space: SpaceSpec) -> f64 {
    match space.p {
        Exponent::One | Exponent::Infinity => u,
        Exponent::Finite(p) if p <= 2.0 => u.powf(p) / p,
        Exponent::Finite(p) => (p - 1.0) * u * u / 2.0,
    }
}

const ROOT_TOL: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 200;

/// Bisection root of `1 + μ = 2μ ρ(1/μ)` on `(0, 1]`.
pub fn smoothness_constant(space: SpaceSpec) -> SmoothnessConstant {
    if !space.is_smooth() {
        return SmoothnessConstant { mu: 1.0, r: 2.0 };
    }
    let gap = |mu: f64| 2.0 * mu * modulus_rho(1.0 / mu, space) - 1.0 - mu;
    // gap -> +inf as mu -> 0; no sign change on (0,1] means the cap R = 2 applies
    if gap(1.0) >= 0.0 {
        return SmoothnessConstant { mu: 1.0, r: 2.0 };
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..ROOT_MAX_ITER {
        if hi - lo <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == 0.0 || gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    SmoothnessConstant {
        mu,
        r: (1.0 + mu).min(2.0),
    }
}

pub(crate) fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lowest index attaining `max |x_i|`.
pub(crate) fn peak_index(x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in x.iter().enumerate() {
        let a = v.abs();
        if a > best_val {
            best = i;
            best_val = a;
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scaled_l2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

fn check_same_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::domain(format!("dimension mismatch: {} vs {}", x.len(), y.len())));
    }
    Ok(())
}
