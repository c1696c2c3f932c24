//! Limited-memory BFGS with monotone Armijo backtracking.

use std::collections::VecDeque;

use super::{dot, DistResult, RowMatrix, SolveStatus, LBFGS_MAX_ITER};
use crate::space::SpaceSpec;

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Minimizes a differentiable `objective` returning `(value, gradient)`.
///
/// Stops when an iteration lowers the value by no more than `tol` relative,
/// when the gradient vanishes, or when no decrease can be found along the
/// search direction.
pub(crate) fn minimize<F>(objective: F, x0: Vec<f64>, tol: f64, max_iter: usize) -> Minimum
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut gx) = objective(&x);
    let mut trace = vec![fx];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let gnorm = dot(&gx, &gx).sqrt();
        if gnorm == 0.0 || fx == 0.0 {
            converged = true;
            break;
        }
        // two-loop recursion
        let mut d: Vec<f64> = gx.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = match pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gnorm,
        };
        for di in d.iter_mut() {
            *di *= gamma;
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&gx, &d);
        if !(slope < 0.0) {
            // not a descent direction: restart from steepest descent
            pairs.clear();
            d = gx.iter().map(|v| -v / gnorm).collect();
            slope = -gnorm;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (fn_, gn) = objective(&xn);
            if fn_.is_finite() && fn_ <= fx + ARMIJO * t * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some((xn, fn_, gn)) = accepted else {
            // no decrease representable along d: stationary to working precision
            converged = true;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 0.0 {
            if pairs.len() == MEMORY {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - fn_;
        x = xn;
        fx = fn_;
        gx = gn;
        trace.push(fx);
        if decrease <= tol * fx.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    debug_assert_eq!(x.len(), n);
    Minimum {
        x,
        value: fx,
        iterations,
        converged,
        trace,
    }
}

/// `min_α ‖f − Gα‖_p` for `1 < p < ∞`.
pub(crate) fn solve_lp(g: &RowMatrix, f: &[f64], alpha0: Vec<f64>, space: SpaceSpec, tol: f64) -> DistResult {
    let objective = |alpha: &[f64]| {
        let r = g.residual(f, alpha);
        let value = space.norm(&r);
        let grad = match space.norming_functional(&r) {
            Ok(crate::space::NormingFunctional::Dense(w)) => g.tmul(&w).into_iter().map(|v| -v).collect(),
            _ => vec![0.0; alpha.len()],
        };
        (value, grad)
    };
    let m = minimize(objective, alpha0, tol, LBFGS_MAX_ITER);
    DistResult {
        dist: m.value,
        coeffs: m.x,
        iterations: m.iterations,
        status: if m.converged {
            SolveStatus::Converged
        } else {
            SolveStatus::MaxIter
        },
        objective: m.trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic() {
        let m = minimize(
            |x| {
                let v = (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
                (v, vec![2.0 * (x[0] - 3.0), 20.0 * (x[1] + 1.0)])
            },
            vec![0.0, 0.0],
            1e-15,
            200,
        );
        assert!(m.converged);
        assert!((m.x[0] - 3.0).abs() < 1e-6 && (m.x[1] + 1.0).abs() < 1e-6);
        for w in m.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let m = minimize(
            |x| {
                // Rosenbrock
                let v = (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
                let g0 = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]);
                let g1 = 200.0 * (x[1] - x[0] * x[0]);
                (v, vec![g0, g1])
            },
            vec![-1.2, 1.0],
            1e-300,
            3,
        );
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
