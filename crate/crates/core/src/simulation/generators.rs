//! Data-generating processes of the three experiments.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::RngStream;
use crate::blockwise::DependentSample;
use crate::error::Result;
use crate::kernel::RegressionSample;
use crate::numerics::{Cholesky, Matrix};
use crate::quantile::DesignData;

pub const EXP1_BETA: [f64; 5] = [3.0, 2.0, 1.0, -1.0, -2.0];
pub const EXP2_NOISE_SD: f64 = 0.5;

/// `Σ_ij = 0.5^{|i-j|}` for the five covariates.
pub fn exp1_sigma() -> Matrix {
    Matrix::from_fn(5, 5, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()))
}

/// Unit exponential by inversion, `-ln(1 - U)`.
pub fn unit_exponential(rng: &mut RngStream) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}

/// `Y = Xᵀβ + ε`, `X ~ N(0, Σ)`, `ε ~ Exp(1)` (not centered).
pub fn gen_experiment1(n: usize, rng: &mut RngStream) -> Result<DesignData> {
    let chol = Cholesky::new(&exp1_sigma())?;
    let l = chol.lower();
    let mut x = Matrix::zeros(n, 5);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let z: [f64; 5] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let row = x.row_mut(i);
        for a in 0..5 {
            row[a] = (0..=a).map(|b| l[(a, b)] * z[b]).sum();
        }
        let signal: f64 = row.iter().zip(EXP1_BETA).map(|(v, b)| v * b).sum();
        y.push(signal + unit_exponential(rng));
    }
    DesignData::new(x, y)
}

pub fn exp2_regression(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sin()
}

/// `Y = sin(2πX) + ε`, `X ~ U(0, 1)`, `ε ~ N(0, 0.5²)`.
pub fn gen_experiment2(n: usize, rng: &mut RngStream) -> Result<RegressionSample> {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.sample(Open01);
        let e: f64 = rng.sample(StandardNormal);
        xs.push(x);
        ys.push(exp2_regression(x) + EXP2_NOISE_SD * e);
    }
    RegressionSample::new(xs, ys)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp3Process {
    pub theta: f64,
    pub a: f64,
    pub x_mean: f64,
    /// Scale of the innovations; 1 in the experiment.
    pub innovation_sd: f64,
    /// Leading error terms generated and discarded.
    pub burn_in: usize,
}

/// `Y_i = θX_i + ε_i`, `X_i ~ N(x_mean, 1)`, `ε_i = aε_{i-1} + e_i` with
/// `ε_1 = e_1` when there is no burn-in.
pub fn gen_experiment3(n: usize, p: &Exp3Process, rng: &mut RngStream) -> Result<DependentSample> {
    let mut eps: Option<f64> = None;
    for _ in 0..p.burn_in {
        let e = p.innovation_sd * rng.sample::<f64, _>(StandardNormal);
        eps = Some(eps.map_or(e, |prev| p.a * prev + e));
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = p.x_mean + rng.sample::<f64, _>(StandardNormal);
        let e = p.innovation_sd * rng.sample::<f64, _>(StandardNormal);
        let cur = eps.map_or(e, |prev| p.a * prev + e);
        eps = Some(cur);
        xs.push(x);
        ys.push(p.theta * x + cur);
    }
    DependentSample::new(xs, ys, Some(p.a))
}
