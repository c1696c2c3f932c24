//! Closed-form convergence bounds for overlay against measured errors.
//!
//! `γ_n ≤ n^{|1/2 − 1/p|}` bounds the projection constant of `n`-dimensional
//! subspaces of ℓp, `R` is the smoothness constant of the space and
//! `B_n^g = min{R^n, C_g + 1}` controls the norms of the greedy projectors.
//! Kolmogorov widths are not computable, so callers pass proxies for `d_n`
//! (typically POD ℓ2 errors).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{smoothness_constant, SpaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Gamma,
    Direct,
    Delayed,
    RPower,
    BBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub n: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundCurve {
    /// Evaluates `f` at every `n`.
    pub fn tabulate(kind: BoundKind, ns: &[usize], f: impl Fn(usize) -> Result<f64>) -> Result<Self> {
        let values = ns.iter().map(|&n| f(n)).collect::<Result<Vec<_>>>()?;
        Ok(BoundCurve {
            kind,
            n: ns.to_vec(),
            values,
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("bounds are defined for n >= 1"));
    }
    Ok(())
}

fn check_cg(c_g: f64) -> Result<()> {
    if !(c_g >= 1.0) {
        return Err(Error::domain(format!("C_g must be at least 1, got {c_g}")));
    }
    Ok(())
}

fn gamma(n: f64, space: SpaceSpec) -> f64 {
    n.powf(space.hilbert_distance_exponent())
}

/// `n^{|1/2 − 1/p|}`.
pub fn gamma_bound(n: usize, space: SpaceSpec) -> Result<f64> {
    check_n(n)?;
    Ok(gamma(n as f64, space))
}

/// `R^{(n−1)/2}`, the theoretical column of the projector-norm table.
pub fn r_power_bound(n: usize, space: SpaceSpec) -> Result<f64> {
    check_n(n)?;
    Ok(smoothness_constant(space).r.powf((n as f64 - 1.0) / 2.0))
}

fn b_real(n: f64, space: SpaceSpec, c_g: f64) -> f64 {
    smoothness_constant(space).r.powf(n).min(c_g + 1.0)
}

/// `B_n^g = min{R^n, C_g + 1}`; pass `f64::INFINITY` for an unknown `C_g`.
pub fn b_bound(n: usize, space: SpaceSpec, c_g: f64) -> Result<f64> {
    check_cg(c_g)?;
    Ok(b_real(n as f64, space, c_g))
}

/// `B_{n+1}^g γ_{2n+1} 2^{n+1} d_n`.
pub fn direct_bound(n: usize, space: SpaceSpec, d_n: f64, c_g: f64) -> Result<f64> {
    check_n(n)?;
    check_cg(c_g)?;
    if !(d_n > 0.0) {
        return Err(Error::domain(format!("width proxy must be positive, got {d_n}")));
    }
    Ok(b_real((n + 1) as f64, space, c_g) * gamma((2 * n + 1) as f64, space) * 2f64.powi(n as i32 + 1) * d_n)
}

/// `√2 B_{n/2}^g γ_{n+m} d_m^{1 − m/n}` for one fixed `0 < m < n`.
pub fn delayed_bound(n: usize, m: usize, space: SpaceSpec, d_m: f64, c_g: f64) -> Result<f64> {
    check_cg(c_g)?;
    if !(0 < m && m < n) {
        return Err(Error::domain(format!("need 0 < m < n, got m = {m}, n = {n}")));
    }
    if !(d_m > 0.0) {
        return Err(Error::domain(format!("width proxy must be positive, got {d_m}")));
    }
    Ok(std::f64::consts::SQRT_2
        * b_real(n as f64 / 2.0, space, c_g)
        * gamma((n + m) as f64, space)
        * d_m.powf(1.0 - m as f64 / n as f64))
}

/// The delayed bound minimized over `m`, with `d[m]` the width proxy of
/// dimension `m` (`d[0]` unused).
pub fn delayed_bound_min(n: usize, space: SpaceSpec, d: &[f64], c_g: f64) -> Result<f64> {
    if n < 2 || d.len() < n {
        return Err(Error::domain(format!(
            "need n >= 2 and proxies for m < n, got n = {n} with {} proxies",
            d.len()
        )));
    }
    let mut best = f64::INFINITY;
    for m in 1..n {
        best = best.min(delayed_bound(n, m, space, d[m], c_g)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_bound(17, SpaceSpec::l2()).unwrap(), 1.0);
        assert_eq!(gamma_bound(4, SpaceSpec::l1()).unwrap(), 2.0);
        assert_eq!(gamma_bound(9, SpaceSpec::linf()).unwrap(), 3.0);
        assert!(gamma_bound(0, SpaceSpec::l1()).is_err());
    }

    #[test]
    fn table_row() {
        let want = [
            (5, 2.6180),
            (10, 8.7186),
            (15, 29.034),
            (20, 96.690),
            (25, 322.00),
            (30, 1072.3),
        ];
        for (n, v) in want {
            let got = r_power_bound(n, SpaceSpec::l2()).unwrap();
            assert!((got - v).abs() / v < 5e-4, "n={n}: {got}");
        }
    }

    #[test]
    fn b_bound_clamps() {
        assert_eq!(b_bound(1000, SpaceSpec::l2(), 1.0).unwrap(), 2.0);
        let r = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((b_bound(3, SpaceSpec::l2(), f64::INFINITY).unwrap() - r.powi(3)).abs() < 1e-9);
        assert!(b_bound(3, SpaceSpec::l2(), 0.5).is_err());
    }

    #[test]
    fn direct_and_delayed() {
        let d = direct_bound(1, SpaceSpec::l2(), 0.5, 1.0).unwrap();
        // B_2 = min(R^2, 2) = 2, γ = 1, 2^2 = 4
        assert!((d - 4.0).abs() < 1e-12);
        let m = 3;
        let dm = 0.01;
        let v = delayed_bound(2 * m, m, SpaceSpec::l2(), dm, 1.0).unwrap();
        assert!((v - 2.0 * std::f64::consts::SQRT_2 * dm.sqrt()).abs() < 1e-12);
        assert!(delayed_bound(4, 4, SpaceSpec::l2(), dm, 1.0).is_err());
        assert!(
            direct_bound(3, SpaceSpec::l1(), 0.2, 2.0).unwrap() > direct_bound(3, SpaceSpec::l1(), 0.1, 2.0).unwrap()
        );
    }

    #[test]
    fn curve_tabulation() {
        let c = BoundCurve::tabulate(BoundKind::Gamma, &[1, 4, 9], |n| gamma_bound(n, SpaceSpec::linf())).unwrap();
        assert_eq!(c.values, vec![1.0, 2.0, 3.0]);
    }
}
