//! Damped Newton iteration for square nonlinear systems.

use super::linalg::{norm_inf, Matrix};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100;
const FD_STEP: f64 = 1e-6;
const MAX_HALVINGS: usize = 40;

/// Finds `x` with `‖g(x)‖∞ ≤ tol`, starting at `x0`.
///
/// The Jacobian is approximated by forward differences. Steps solve the
/// regularized normal equations `(JᵀJ + μI) δ = -Jᵀg`, which is the Newton
/// step when `J` is well conditioned and a least-squares step when it is
/// singular (systems whose solution set is a manifold). Each step is halved
/// until `‖g‖∞` decreases.
pub fn solve_nonlinear<G>(mut g: G, x0: &[f64], tol: f64) -> Result<Vec<f64>>
where
    G: FnMut(&[f64]) -> Vec<f64>,
{
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("starting point must be finite".into()));
    }
    let m = x0.len();
    let mut x = x0.to_vec();
    let mut gx = g(&x);
    if gx.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "system maps {m} unknowns to {} equations",
            gx.len()
        )));
    }
    let mut res = finite_norm(&gx);

    for iteration in 0..MAX_ITERATIONS {
        if res <= tol {
            return Ok(x);
        }
        let jac = jacobian(&mut g, &x, &gx);
        let step = match regularized_step(&jac, &gx) {
            Some(s) => s,
            None => return Err(stalled(iteration, res, x)),
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            let gt = g(&trial);
            let rt = finite_norm(&gt);
            if rt < res {
                x = trial;
                gx = gt;
                res = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(stalled(iteration, res, x));
        }
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(stalled(MAX_ITERATIONS, res, x))
    }
}

fn stalled(iterations: usize, residual: f64, best: Vec<f64>) -> Error {
    Error::NoConvergence {
        what: "damped Newton",
        iterations,
        residual,
        best,
    }
}

fn finite_norm(v: &[f64]) -> f64 {
    if v.iter().all(|x| x.is_finite()) {
        norm_inf(v)
    } else {
        f64::INFINITY
    }
}

fn jacobian<G: FnMut(&[f64]) -> Vec<f64>>(g: &mut G, x: &[f64], gx: &[f64]) -> Matrix {
    let m = x.len();
    let mut jac = Matrix::zeros(m, m);
    let mut probe = x.to_vec();
    for j in 0..m {
        let h = FD_STEP * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let gp = g(&probe);
        probe[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (gp[i] - gx[i]) / h;
        }
    }
    jac
}

fn regularized_step(jac: &Matrix, gx: &[f64]) -> Option<Vec<f64>> {
    let m = jac.rows();
    let jt = jac.transpose();
    let mut normal = jt.matmul(jac);
    let rhs: Vec<f64> = jt.mul_vec(gx).iter().map(|v| -v).collect();
    let mu = 1e-10 * normal.max_abs_diagonal().max(f64::MIN_POSITIVE);
    for i in 0..m {
        normal[(i, i)] += mu;
    }
    let step = super::linalg::Cholesky::new(&normal).ok()?.solve(&rhs);
    step.iter().all(|v| v.is_finite()).then_some(step)
}
