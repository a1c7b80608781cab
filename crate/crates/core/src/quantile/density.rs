use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Error density `u ↦ f_e(u)`, evaluated at fitted quantile intercepts.
#[derive(Clone)]
pub struct ErrorDensity {
    label: String,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ErrorDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErrorDensity").field("label", &self.label).finish()
    }
}

impl ErrorDensity {
    pub fn new(label: impl Into<String>, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            density: Arc::new(density),
        }
    }

    /// Unit exponential (Gamma with shape 1). Zero on `u ≤ 0`.
    pub fn exponential() -> Self {
        Self::new("exponential", |u| if u > 0.0 { (-u).exp() } else { 0.0 })
    }

    pub fn normal(mean: f64, sd: f64) -> Self {
        Self::new("normal", move |u| {
            let z = (u - mean) / sd;
            (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
        })
    }

    /// Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth.
    pub fn gaussian_kde(sample: &[f64]) -> Result<Self> {
        let n = sample.len();
        if n < 2 {
            return Err(Error::InvalidInput("kernel density estimate needs two points".into()));
        }
        let mean = sample.iter().sum::<f64>() / n as f64;
        let sd = (sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        if !(spread > 0.0) {
            return Err(Error::InvalidInput("sample has no spread".into()));
        }
        let h = 0.9 * spread * (n as f64).powf(-0.2);
        let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
        Ok(Self::new("gaussian-kde", move |u| {
            norm * sorted
                .iter()
                .map(|&x| {
                    let z = (u - x) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.density)(u)
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_support() {
        let f = ErrorDensity::exponential();
        assert_eq!(f.eval(-0.1), 0.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert!((f.eval(1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kde_integrates_to_one() {
        let sample: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
        let f = ErrorDensity::gaussian_kde(&sample).unwrap();
        let total = crate::numerics::integrate(|u| f.eval(u), -10.0, 10.0, 1e-9).unwrap();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(ErrorDensity::gaussian_kde(&[1.0, 1.0, 1.0]).is_err());
    }
}
