//! Composite regression of initial estimators on their asymptotic
//! representation terms.
//!
//! Given initial estimates `θ̂_k` computed at values `τ_k` of a tuning
//! parameter that the target does not depend on, and the known leading-term
//! factors `ξ̂_k`, the composite estimate is the intercept of the weighted
//! regression `θ̂_k ≈ θ + ξ̂_k φ`. When the scale `φ` is known the intercept
//! reduces to a weighted mean of the shifted estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_nonlinear, solve_spd, Matrix};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
const DEGENERACY_RATIO: f64 = 1e-12;
const ORIGINAL_WEIGHT_TOLERANCE: f64 = 1e-10;

/// Initial estimates `θ̂_k` at tuning values `τ_k`, with their `ξ̂(τ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialEstimateSet {
    taus: Vec<f64>,
    theta_hats: Vec<f64>,
    xi_hats: Vec<f64>,
}

impl InitialEstimateSet {
    pub fn new(taus: Vec<f64>, theta_hats: Vec<f64>, xi_hats: Vec<f64>) -> Result<Self> {
        let m = taus.len();
        if theta_hats.len() != m || xi_hats.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} taus, {} estimates, {} xi values",
                theta_hats.len(),
                xi_hats.len()
            )));
        }
        if m < 2 {
            return Err(Error::InvalidInput("at least two initial estimates are required".into()));
        }
        if taus.iter().chain(&theta_hats).chain(&xi_hats).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial estimates must be finite".into()));
        }
        if taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("taus must be strictly increasing".into()));
        }
        Ok(Self {
            taus,
            theta_hats,
            xi_hats,
        })
    }

    pub fn m(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn theta_hats(&self) -> &[f64] {
        &self.theta_hats
    }

    pub fn xi_hats(&self) -> &[f64] {
        &self.xi_hats
    }
}

/// Weights summing to one. Entries may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE * values.len().max(1) as f64 {
            return Err(Error::InvalidInput(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(values))
    }

    /// Divides by the sum so that the result sums to one.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        if !(sum.is_finite() && sum.abs() > f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput("weights cannot be normalized".into()));
        }
        Self::new(values.into_iter().map(|v| v / sum).collect())
    }

    pub fn equal(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        WeightVector::new(values)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Composite estimate and the fitted scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombineResult {
    pub theta_tilde: f64,
    pub phi_hat: f64,
}

fn check_len(w: &WeightVector, m: usize) -> Result<()> {
    if w.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {m} estimates",
            w.len()
        )));
    }
    Ok(())
}

/// Weighted centering of `xi`: returns `(ξ̄, Σ w (ξ - ξ̄)²)`, rejecting
/// designs where the spread is negligible against `max ξ²`.
fn weighted_spread(w: &[f64], xi: &[f64]) -> Result<(f64, f64)> {
    let mean: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum();
    let spread: f64 = w.iter().zip(xi).map(|(a, b)| a * (b - mean).powi(2)).sum();
    let scale = xi.iter().fold(0.0f64, |m, v| m.max(v * v));
    if !(spread > DEGENERACY_RATIO * scale) || spread == 0.0 {
        return Err(Error::DegenerateDesign(format!(
            "weighted spread of xi is {spread:.3e} against max xi^2 {scale:.3e}"
        )));
    }
    Ok((mean, spread))
}

/// Intercept of the weighted regression of `θ̂_k` on `ξ̂_k` (unknown scale).
pub fn combine_unknown_scale(est: &InitialEstimateSet, w: &WeightVector) -> Result<CombineResult> {
    check_len(w, est.m())?;
    let w = w.as_slice();
    let (xi_bar, spread) = weighted_spread(w, &est.xi_hats)?;
    let weighted_mean: f64 = w.iter().zip(&est.theta_hats).map(|(a, b)| a * b).sum();
    let cross: f64 = w
        .iter()
        .zip(&est.theta_hats)
        .zip(&est.xi_hats)
        .map(|((wk, t), x)| wk * t * (x - xi_bar))
        .sum();
    let phi_hat = cross / spread;
    Ok(CombineResult {
        theta_tilde: weighted_mean - phi_hat * xi_bar,
        phi_hat,
    })
}

/// Weighted mean of `θ̂_k - ξ̂_k φ_n` for a known scale `φ_n`.
pub fn combine_known_scale(
    est: &InitialEstimateSet,
    w: &WeightVector,
    phi_n: f64,
) -> Result<CombineResult> {
    check_len(w, est.m())?;
    if !phi_n.is_finite() {
        return Err(Error::InvalidInput("phi_n must be finite".into()));
    }
    let theta_tilde = w
        .as_slice()
        .iter()
        .zip(&est.theta_hats)
        .zip(&est.xi_hats)
        .map(|((wk, t), x)| wk * (t - x * phi_n))
        .sum();
    Ok(CombineResult {
        theta_tilde,
        phi_hat: phi_n,
    })
}

/// Effective weights `w̃` on the initial estimates induced by the regression:
/// `w̃_k = w_k - ξ̄ w_k (ξ_k - ξ̄) / Σ w (ξ - ξ̄)²`.
pub fn regenerated_weights(w: &WeightVector, xi: &[f64]) -> Result<WeightVector> {
    check_len(w, xi.len())?;
    let values = regenerate(w.as_slice(), xi)?;
    Ok(WeightVector(values))
}

fn regenerate(w: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let (xi_bar, spread) = weighted_spread(w, xi)?;
    Ok(w
        .iter()
        .zip(xi)
        .map(|(wk, x)| wk - xi_bar * wk * (x - xi_bar) / spread)
        .collect())
}

/// Minimizer of `w̃ᵀ Σ w̃` subject to `Σ w̃_k = 1`: `Σ⁻¹1 / (1ᵀΣ⁻¹1)`.
pub fn optimal_tilde_weights(sigma: &Matrix) -> Result<WeightVector> {
    let ones = vec![1.0; sigma.rows()];
    let z = solve_spd(sigma, &ones)?;
    WeightVector::normalized(z)
}

/// Solves `regenerated_weights(w, ξ) = w̃*` for original weights `w`.
///
/// The system is nonlinear and in general has a manifold of solutions; the
/// first root reached by damped Newton started at `w̃*` is returned. Since the
/// image of the map satisfies `Σ w̃_k ξ_k = 0`, a target violating that
/// constraint has no solution and yields `NoConvergence`.
pub fn solve_original_weights(w_tilde_star: &WeightVector, xi: &[f64]) -> Result<WeightVector> {
    check_len(w_tilde_star, xi.len())?;
    // Surface degenerate designs before iterating.
    weighted_spread(&vec![1.0 / xi.len() as f64; xi.len()], xi)?;
    let target = w_tilde_star.as_slice();
    let residual = |w: &[f64]| -> Vec<f64> {
        match regenerate(w, xi) {
            Ok(r) => r.iter().zip(target).map(|(a, b)| a - b).collect(),
            Err(_) => vec![f64::INFINITY; w.len()],
        }
    };
    let w0 = match solve_nonlinear(residual, target, ORIGINAL_WEIGHT_TOLERANCE) {
        Ok(w0) => w0,
        // The target can sit where the weighted spread is not positive.
        Err(_) => solve_nonlinear(residual, &vec![1.0 / xi.len() as f64; xi.len()], ORIGINAL_WEIGHT_TOLERANCE)?,
    };
    // The sum constraint holds at any exact root; renormalizing only removes rounding.
    let sum: f64 = w0.iter().sum();
    Ok(WeightVector(w0.into_iter().map(|v| v / sum).collect()))
}
