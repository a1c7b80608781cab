//! Linear quantile regression, composite quantile regression, and the
//! bias-corrected composite quantile estimator with its optimal weights.

mod density;
mod solver;

pub use density::ErrorDensity;
pub use solver::check_loss;

use serde::{Deserialize, Serialize};

use crate::combiner::{optimal_tilde_weights, WeightVector};
use crate::error::{Error, Result};
use crate::numerics::{solve_spd, Matrix};
use solver::CheckLossProblem;

/// Covariates `x` (n×p, no intercept column) and responses `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignData {
    x: Matrix,
    y: Vec<f64>,
}

impl DesignData {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate rows for {} responses",
                x.rows(),
                y.len()
            )));
        }
        if x.rows() <= x.cols() {
            return Err(Error::InvalidInput(format!(
                "need n > p, got n = {}, p = {}",
                x.rows(),
                x.cols()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("responses must be finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `D̂ = n⁻¹ Σ x_i x_iᵀ`.
    pub fn second_moment(&self) -> Matrix {
        let p = self.p();
        let n = self.n() as f64;
        let mut d = Matrix::zeros(p, p);
        for i in 0..self.n() {
            let row = self.x.row(i);
            for a in 0..p {
                for b in 0..=a {
                    d[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..=a {
                d[(a, b)] /= n;
                d[(b, a)] = d[(a, b)];
            }
        }
        d
    }

    fn with_intercept(&self) -> Matrix {
        let p = self.p();
        Matrix::from_fn(self.n(), p + 1, |i, j| if j == 0 { 1.0 } else { self.x[(i, j - 1)] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFit {
    pub tau: f64,
    pub intercept: f64,
    pub beta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl QuantileFit {
    pub fn residuals(&self, data: &DesignData) -> Vec<f64> {
        (0..data.n())
            .map(|i| data.y[i] - self.intercept - crate::numerics::dot(data.x.row(i), &self.beta))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqrFit {
    pub taus: Vec<f64>,
    pub beta: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("quantile level {tau} is outside (0, 1)")))
    }
}

/// `argmin_{b,β} Σ ρ_τ(y_i - b - βᵀx_i)`.
pub fn fit_quantile(data: &DesignData, tau: f64) -> Result<QuantileFit> {
    check_tau(tau)?;
    let z = data.with_intercept();
    let levels = vec![tau; data.n()];
    let problem = CheckLossProblem {
        design: &z,
        response: &data.y,
        levels: &levels,
    };
    let sol = problem.solve(None)?;
    Ok(QuantileFit {
        tau,
        intercept: sol.params[0],
        beta: sol.params[1..].to_vec(),
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

/// Composite quantile regression: shared slope, one intercept per level,
/// minimizing `Σ_i Σ_k ρ_{τ_k}(y_i - b_k - βᵀx_i)`.
pub fn fit_cqr(data: &DesignData, taus: &[f64]) -> Result<CqrFit> {
    if taus.is_empty() {
        return Err(Error::InvalidInput("no quantile levels".into()));
    }
    for &t in taus {
        check_tau(t)?;
    }
    let mut sorted = taus.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("quantile levels must be distinct".into()));
    }

    let (n, p, m) = (data.n(), data.p(), taus.len());
    let d = m + p;
    let mut z = Matrix::zeros(n * m, d);
    let mut response = Vec::with_capacity(n * m);
    let mut levels = Vec::with_capacity(n * m);
    for (k, &tau) in taus.iter().enumerate() {
        for i in 0..n {
            let r = k * n + i;
            z[(r, k)] = 1.0;
            z.row_mut(r)[m..].copy_from_slice(data.x.row(i));
            response.push(data.y[i]);
            levels.push(tau);
        }
    }

    // Warm start: median slope, then per-level intercepts at the empirical
    // quantiles of the slope-adjusted responses.
    let median = fit_quantile(data, 0.5)?;
    let mut shifted: Vec<f64> = (0..n)
        .map(|i| data.y[i] - crate::numerics::dot(data.x.row(i), &median.beta))
        .collect();
    shifted.sort_by(f64::total_cmp);
    let mut start: Vec<f64> = taus
        .iter()
        .map(|&t| shifted[((t * n as f64).ceil() as usize).clamp(1, n) - 1])
        .collect();
    start.extend_from_slice(&median.beta);

    let problem = CheckLossProblem {
        design: &z,
        response: &response,
        levels: &levels,
    };
    let sol = problem.solve(Some(&start))?;
    Ok(CqrFit {
        taus: taus.to_vec(),
        intercepts: sol.params[..m].to_vec(),
        beta: sol.params[m..].to_vec(),
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

/// Residual threshold below which an observation counts as `y_i ≤ fit`.
fn on_or_below(residual: f64, scale: f64) -> bool {
    residual <= 1e-10 * scale
}

/// Bias-corrected composite estimator computed from per-level fits:
///
/// `β̃ = Σ_k w_k { β̂_k - (f̂_k n)⁻¹ D̂⁻¹ Σ_i x_i (τ_k - 1[y_i ≤ b̂_k + β̂_kᵀx_i]) }`
///
/// with `f̂_k = f_e(b̂_k)`.
pub fn ace_quantile_from_fits(
    data: &DesignData,
    fits: &[QuantileFit],
    w: &WeightVector,
    fe: &ErrorDensity,
) -> Result<Vec<f64>> {
    if fits.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} fits for {} weights",
            fits.len(),
            w.len()
        )));
    }
    let p = data.p();
    let n = data.n() as f64;
    let d_hat = data.second_moment();
    let scale = data.y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = vec![0.0; p];
    for (fit, &wk) in fits.iter().zip(w.as_slice()) {
        let f = fe.eval(fit.intercept);
        if !(f > 1e-12) {
            return Err(Error::ZeroDensity {
                tau: fit.tau,
                at: fit.intercept,
            });
        }
        let mut score = vec![0.0; p];
        for (i, r) in fit.residuals(data).into_iter().enumerate() {
            let ind = if on_or_below(r, scale) { 1.0 } else { 0.0 };
            let c = fit.tau - ind;
            for (s, &x) in score.iter_mut().zip(data.x.row(i)) {
                *s += x * c;
            }
        }
        let correction = if p == 0 { Vec::new() } else { solve_spd(&d_hat, &score)? };
        for j in 0..p {
            out[j] += wk * (fit.beta[j] - correction[j] / (f * n));
        }
    }
    Ok(out)
}

/// Fits every level in `taus` and returns the composite estimator.
pub fn ace_quantile(
    data: &DesignData,
    taus: &[f64],
    w: &WeightVector,
    fe: &ErrorDensity,
) -> Result<Vec<f64>> {
    let fits = taus
        .iter()
        .map(|&t| fit_quantile(data, t))
        .collect::<Result<Vec<_>>>()?;
    ace_quantile_from_fits(data, &fits, w, fe)
}

/// `A₀[k, k'] = min(τ_k, τ_k')(1 - max(τ_k, τ_k')) / (f_k f_k')`.
pub fn a0_matrix(taus: &[f64], fq: &[f64]) -> Result<Matrix> {
    if taus.len() != fq.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} levels, {} density values",
            taus.len(),
            fq.len()
        )));
    }
    if let Some(bad) = fq.iter().find(|&&f| !(f > 0.0)) {
        return Err(Error::InvalidInput(format!("density value {bad} is not positive")));
    }
    let m = taus.len();
    Ok(Matrix::from_fn(m, m, |k, j| {
        let (lo, hi) = (taus[k].min(taus[j]), taus[k].max(taus[j]));
        lo * (1.0 - hi) / (fq[k] * fq[j])
    }))
}

/// `w* = A₀⁻¹1 / (1ᵀA₀⁻¹1)`.
pub fn optimal_qr_weights(a0: &Matrix) -> Result<WeightVector> {
    optimal_tilde_weights(a0)
}

/// Weights proportional to the density at each quantile; under these the
/// composite estimator matches the composite quantile regression covariance.
pub fn zou_yuan_weights(fq: &[f64]) -> Result<WeightVector> {
    WeightVector::normalized(fq.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data(n: usize) -> DesignData {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 - 2.0).collect();
        let y = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        DesignData::new(Matrix::from_row_major(n, 1, xs).unwrap(), y).unwrap()
    }

    #[test]
    fn median_of_odd_sample() {
        let data = DesignData::new(Matrix::zeros(3, 0), vec![1.0, 2.0, 100.0]).unwrap();
        let fit = fit_quantile(&data, 0.5).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!(fit.beta.is_empty());
    }

    #[test]
    fn noiseless_line_is_recovered() {
        let data = line_data(12);
        for tau in [0.1, 0.5, 0.9] {
            let fit = fit_quantile(&data, tau).unwrap();
            assert!((fit.intercept - 1.0).abs() < 1e-9);
            assert!((fit.beta[0] - 2.0).abs() < 1e-9);
            assert!(fit.objective < 1e-9);
        }
        let cqr = fit_cqr(&data, &[0.25, 0.5, 0.75]).unwrap();
        assert!((cqr.beta[0] - 2.0).abs() < 1e-9);
        for b in &cqr.intercepts {
            assert!((b - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_design() {
        let x = Matrix::from_row_major(4, 1, vec![1.0; 4]).unwrap();
        let data = DesignData::new(x, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(fit_quantile(&data, 0.5), Err(Error::RankDeficient)));
    }

    #[test]
    fn invalid_levels() {
        let data = line_data(6);
        assert!(fit_quantile(&data, 0.0).is_err());
        assert!(fit_quantile(&data, 1.0).is_err());
        assert!(fit_cqr(&data, &[0.3, 0.3]).is_err());
        assert!(fit_cqr(&data, &[]).is_err());
    }

    #[test]
    fn a0_examples() {
        let a = a0_matrix(&[0.5], &[1.0]).unwrap();
        assert_eq!(a[(0, 0)], 0.25);
        // Exp(1): f(Q(τ)) = 1 - τ
        let a = a0_matrix(&[0.25, 0.75], &[0.75, 0.25]).unwrap();
        assert!((a[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((a[(1, 1)] - 3.0).abs() < 1e-14);
        assert!((a[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a[(0, 1)], a[(1, 0)]);
        assert!(a0_matrix(&[0.5], &[0.0]).is_err());
    }

    #[test]
    fn optimal_qr_weight_examples() {
        let w = optimal_qr_weights(&Matrix::identity(4)).unwrap();
        assert!(w.as_slice().iter().all(|v| (v - 0.25).abs() < 1e-15));
        let w = optimal_qr_weights(&Matrix::diag(&[1.0, 4.0])).unwrap();
        assert!((w.as_slice()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_density_is_an_error() {
        let data = line_data(10);
        let fit = fit_quantile(&data, 0.5).unwrap();
        let fe = ErrorDensity::new("flat-zero", |_| 0.0);
        assert!(matches!(
            ace_quantile_from_fits(&data, &[fit], &WeightVector::equal(1), &fe),
            Err(Error::ZeroDensity { .. })
        ));
    }
}
