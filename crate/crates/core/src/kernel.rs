//! Kernel regression: the local constant (Nadaraya–Watson) fit, its pooled
//! multi-bandwidth variant, and the two composite estimators built from fits
//! at bandwidths `h_k = τ_k n^{-η}`.

use serde::{Deserialize, Serialize};

use crate::combiner::{
    combine_unknown_scale, optimal_tilde_weights, regenerated_weights, InitialEstimateSet, WeightVector,
};
use crate::error::{Error, Result};
use crate::numerics::{integrate, Matrix};

/// Denominators at or below this count as an empty window.
const EMPTY_WINDOW: f64 = 1e-300;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Epanechnikov,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
}

impl KernelSpec {
    pub fn epanechnikov() -> Self {
        Self {
            kind: KernelKind::Epanechnikov,
        }
    }

    pub fn gaussian() -> Self {
        Self {
            kind: KernelKind::Gaussian,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            KernelKind::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelKind::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * u * u).exp(),
        }
    }

    /// `μ₂(K) = ∫u²K(u)du`.
    pub fn mu2(&self) -> f64 {
        match self.kind {
            KernelKind::Epanechnikov => 0.2,
            KernelKind::Gaussian => 1.0,
        }
    }

    /// Half-width of the integration range: the support, or 12 standard
    /// deviations for the Gaussian.
    pub fn reach(&self) -> f64 {
        match self.kind {
            KernelKind::Epanechnikov => 1.0,
            KernelKind::Gaussian => 12.0,
        }
    }

    /// `|∫K - 1|` by quadrature.
    pub fn normalization_error(&self) -> Result<f64> {
        let r = self.reach();
        Ok((integrate(|u| self.eval(u), -r, r, 1e-12)? - 1.0).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl RegressionSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch(format!("{} xs for {} ys", xs.len(), ys.len())));
        }
        if xs.is_empty() {
            return Err(Error::InvalidInput("empty sample".into()));
        }
        if xs.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(Error::InvalidInput("design points must lie in (0, 1)".into()));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidInput("responses must be finite".into()));
        }
        Ok(Self { xs, ys })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn x_range(&self) -> f64 {
        let (lo, hi) = self
            .xs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        hi - lo
    }

    fn subset(&self, idx: &[usize]) -> RegressionSample {
        RegressionSample {
            xs: idx.iter().map(|&i| self.xs[i]).collect(),
            ys: idx.iter().map(|&i| self.ys[i]).collect(),
        }
    }
}

/// Bandwidths `h_k = τ_k n^{-η}` for strictly increasing `τ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSchedule {
    eta: f64,
    taus: Vec<f64>,
    n: usize,
}

impl BandwidthSchedule {
    pub fn new(eta: f64, taus: Vec<f64>, n: usize) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidInput(format!("eta = {eta} is outside (0, 1)")));
        }
        if n == 0 || taus.is_empty() {
            return Err(Error::InvalidInput("schedule needs n > 0 and at least one level".into()));
        }
        if taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput("levels must be positive".into()));
        }
        if taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("levels must be strictly increasing".into()));
        }
        Ok(Self { eta, taus, n })
    }

    /// Levels `τ_k = c_k h n^η`, so that `h_k = c_k h`.
    pub fn around(h: f64, multipliers: &[f64], eta: f64, n: usize) -> Result<Self> {
        let scale = h * (n as f64).powf(eta);
        Self::new(eta, multipliers.iter().map(|c| c * scale).collect(), n)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self, tau: f64) -> f64 {
        tau * (self.n as f64).powf(-self.eta)
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        self.taus.iter().map(|&t| self.bandwidth(t)).collect()
    }

    /// Checks `0 < h_k < range`.
    pub fn check_range(&self, range: f64) -> Result<()> {
        match self.bandwidths().into_iter().find(|&h| !(h > 0.0 && h < range)) {
            Some(h) => Err(Error::InvalidInput(format!(
                "bandwidth {h} is outside (0, {range})"
            ))),
            None => Ok(()),
        }
    }
}

/// Residuals entering `ξ̂(τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// `Y_i - r̂^{(-i)}(x)`, the fit at `x` without observation `i`.
    #[default]
    LeaveOneOut,
    /// `Y_i - r̂(x)`; the correction then vanishes identically.
    Literal,
}

fn kernel_sums(s: &RegressionSample, x: f64, h: f64, k: &KernelSpec) -> (f64, f64) {
    s.xs.iter().zip(&s.ys).fold((0.0, 0.0), |(sk, sky), (&xi, &yi)| {
        let kv = k.eval((xi - x) / h);
        (sk + kv, sky + kv * yi)
    })
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("bandwidth {h} must be positive")))
    }
}

/// `r̂_h(x) = Σ Y_i K((X_i-x)/h) / Σ K((X_i-x)/h)`.
pub fn nw_estimate(s: &RegressionSample, x: f64, h: f64, k: &KernelSpec) -> Result<f64> {
    check_bandwidth(h)?;
    let (sk, sky) = kernel_sums(s, x, h, k);
    if sk <= EMPTY_WINDOW {
        return Err(Error::EmptyWindow { x, h });
    }
    Ok(sky / sk)
}

/// Pooled ratio `Σ_i Σ_k Y_i K((X_i-x)/h_k) / Σ_i Σ_k K((X_i-x)/h_k)`.
pub fn clc_estimate(s: &RegressionSample, x: f64, hs: &[f64], k: &KernelSpec) -> Result<f64> {
    if hs.is_empty() {
        return Err(Error::InvalidInput("no bandwidths".into()));
    }
    let (mut sk, mut sky) = (0.0, 0.0);
    for &h in hs {
        check_bandwidth(h)?;
        let (a, b) = kernel_sums(s, x, h, k);
        sk += a;
        sky += b;
    }
    if sk <= EMPTY_WINDOW {
        return Err(Error::EmptyWindow {
            x,
            h: hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    Ok(sky / sk)
}

/// `ξ̂(τ) = n⁻¹ v̂_τ(x)⁻¹ Σ K_τ(X_i-x) e_i` with `v̂_τ(x) = n⁻¹ Σ K_τ(X_i-x)`,
/// i.e. the kernel-weighted mean of the residuals `e_i` over the window.
///
/// Under [`ResidualMode::LeaveOneOut`], `e_i = S(Y_i - r̂)/(S - K_i)` with
/// `S = Σ K_j`; observations alone in the window contribute nothing.
pub fn xi_hat_nw(
    s: &RegressionSample,
    x: f64,
    tau: f64,
    sched: &BandwidthSchedule,
    k: &KernelSpec,
    mode: ResidualMode,
) -> Result<f64> {
    let h = sched.bandwidth(tau);
    check_bandwidth(h)?;
    let weights: Vec<f64> = s.xs.iter().map(|&xi| k.eval((xi - x) / h)).collect();
    let sk: f64 = weights.iter().sum();
    if sk <= EMPTY_WINDOW {
        return Err(Error::EmptyWindow { x, h });
    }
    let fit = weights.iter().zip(&s.ys).map(|(w, y)| w * y).sum::<f64>() / sk;
    let total: f64 = weights
        .iter()
        .zip(&s.ys)
        .map(|(&kw, &y)| match mode {
            ResidualMode::Literal => kw * (y - fit),
            ResidualMode::LeaveOneOut => {
                let rest = sk - kw;
                if kw == 0.0 || rest <= EMPTY_WINDOW * sk.max(1.0) {
                    0.0
                } else {
                    kw * sk * (y - fit) / rest
                }
            }
        })
        .sum();
    Ok(total / sk)
}

/// Local constant fits `r̂_{τ_k}(x)` across the schedule.
pub fn nw_fits(s: &RegressionSample, x: f64, sched: &BandwidthSchedule, k: &KernelSpec) -> Result<Vec<f64>> {
    sched.bandwidths().into_iter().map(|h| nw_estimate(s, x, h, k)).collect()
}

fn squared_levels(sched: &BandwidthSchedule) -> Vec<f64> {
    sched.taus.iter().map(|t| t * t).collect()
}

/// `r̃₁(x) = Σ w_k r̂_{τ_k}(x) - φ̃ τ²̄`, the unknown-scale combination with
/// `ξ_k = τ_k²`.
pub fn ace_r1(
    s: &RegressionSample,
    x: f64,
    sched: &BandwidthSchedule,
    w: &WeightVector,
    k: &KernelSpec,
) -> Result<f64> {
    let fits = nw_fits(s, x, sched, k)?;
    let est = InitialEstimateSet::new(sched.taus.clone(), fits, squared_levels(sched))?;
    Ok(combine_unknown_scale(&est, w)?.theta_tilde)
}

/// `r̃₂(x) = Σ w_k (r̂_{τ_k}(x) - n^{-(1-η)/2} ξ̂(τ_k))`.
pub fn ace_r2(
    s: &RegressionSample,
    x: f64,
    sched: &BandwidthSchedule,
    w: &WeightVector,
    k: &KernelSpec,
    mode: ResidualMode,
) -> Result<f64> {
    if w.len() != sched.taus.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} levels",
            w.len(),
            sched.taus.len()
        )));
    }
    let phi = (sched.n as f64).powf(-(1.0 - sched.eta) / 2.0);
    let mut total = 0.0;
    for (&tau, &wk) in sched.taus.iter().zip(w.as_slice()) {
        let fit = nw_estimate(s, x, sched.bandwidth(tau), k)?;
        let xi = xi_hat_nw(s, x, tau, sched, k, mode)?;
        total += wk * (fit - phi * xi);
    }
    Ok(total)
}

/// Out-of-fold mean squared prediction error for each bandwidth in `grid`;
/// `None` where no held-out point has a nonempty window.
///
/// Folds: after sorting by `x`, the point of rank `j` belongs to fold
/// `j mod folds`.
pub fn cv_curve(s: &RegressionSample, folds: usize, grid: &[f64], k: &KernelSpec) -> Result<Vec<Option<f64>>> {
    if folds < 2 || folds > s.n() {
        return Err(Error::InvalidInput(format!("cannot split {} points into {folds} folds", s.n())));
    }
    let mut order: Vec<usize> = (0..s.n()).collect();
    order.sort_by(|&a, &b| s.xs[a].total_cmp(&s.xs[b]).then(a.cmp(&b)));
    let splits: Vec<(RegressionSample, Vec<usize>)> = (0..folds)
        .map(|f| {
            let train: Vec<usize> = order.iter().enumerate().filter(|(j, _)| j % folds != f).map(|(_, &i)| i).collect();
            let test: Vec<usize> = order.iter().enumerate().filter(|(j, _)| j % folds == f).map(|(_, &i)| i).collect();
            (s.subset(&train), test)
        })
        .collect();
    grid.iter()
        .map(|&h| {
            check_bandwidth(h)?;
            let (mut sse, mut count) = (0.0, 0usize);
            for (train, test) in &splits {
                for &i in test {
                    if let Ok(pred) = nw_estimate(train, s.xs[i], h, k) {
                        sse += (s.ys[i] - pred).powi(2);
                        count += 1;
                    }
                }
            }
            Ok((count > 0).then(|| sse / count as f64))
        })
        .collect()
}

/// Grid bandwidth minimizing [`cv_curve`]; ties go to the smaller `h`.
pub fn cv_bandwidth(s: &RegressionSample, folds: usize, grid: &[f64], k: &KernelSpec) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty bandwidth grid".into()));
    }
    let curve = cv_curve(s, folds, grid, k)?;
    let mut best: Option<(f64, f64)> = None;
    for (&h, err) in grid.iter().zip(curve) {
        let Some(e) = err else { continue };
        let better = match best {
            None => true,
            Some((bh, be)) => e < be || (e == be && h < bh),
        };
        if better {
            best = Some((h, e));
        }
    }
    best.map(|(h, _)| h).ok_or(Error::AllWindowsEmpty)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AMatrices {
    pub a1: Matrix,
    pub a2: Matrix,
    /// `s_k = 1 - τ²̄(τ_k² - τ²̄)/Σ(τ_j² - τ²̄)²` with the unweighted mean.
    pub s: Vec<f64>,
    /// Regenerated weights for `ξ_k = τ_k²`, when weights were supplied.
    pub g: Option<Vec<f64>>,
}

/// `(τ_k τ_j)⁻¹ ∫K(u/τ_k)K(u/τ_j)du` by adaptive quadrature.
pub fn a2_entry_quadrature(tk: f64, tj: f64, k: &KernelSpec) -> Result<f64> {
    let reach = k.reach() * tk.min(tj);
    let integral = integrate(|u| k.eval(u / tk) * k.eval(u / tj), -reach, reach, 1e-12)?;
    Ok(integral / (tk * tj))
}

fn a2_entry(tk: f64, tj: f64, k: &KernelSpec) -> Result<f64> {
    match k.kind {
        KernelKind::Gaussian => Ok(FRAC_1_SQRT_2PI / (tk * tk + tj * tj).sqrt()),
        KernelKind::Epanechnikov => a2_entry_quadrature(tk, tj, k),
    }
}

pub fn a_matrices(taus: &[f64], k: &KernelSpec, w: Option<&WeightVector>) -> Result<AMatrices> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput("levels must be positive".into()));
    }
    let m = taus.len();
    let mut a2 = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = a2_entry(taus[i], taus[j], k)?;
            a2[(i, j)] = v;
            a2[(j, i)] = v;
        }
    }
    let sq: Vec<f64> = taus.iter().map(|t| t * t).collect();
    let mean = sq.iter().sum::<f64>() / m as f64;
    let spread: f64 = sq.iter().map(|v| (v - mean).powi(2)).sum();
    // Without spread in τ² there is no slope to remove.
    let s: Vec<f64> = if spread > 0.0 {
        sq.iter().map(|v| 1.0 - mean * (v - mean) / spread).collect()
    } else {
        vec![1.0; m]
    };
    let a1 = Matrix::from_fn(m, m, |i, j| s[i] * s[j] * a2[(i, j)]);
    let g = match w {
        Some(w) => Some(regenerated_weights(w, &sq)?.into_inner()),
        None => None,
    };
    Ok(AMatrices { a1, a2, s, g })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    pub w1_star: WeightVector,
    pub w2_star: WeightVector,
    /// `(1ᵀA₁⁻¹1)⁻¹`
    pub factor1: f64,
    /// `(1ᵀA₂⁻¹1)⁻¹`
    pub factor2: f64,
}

/// Variance-optimal weights `w_i* = A_i⁻¹1/(1ᵀA_i⁻¹1)` and their factors.
pub fn kernel_weight_vectors(taus: &[f64], k: &KernelSpec) -> Result<KernelWeights> {
    let a = a_matrices(taus, k, None)?;
    let w1_star = optimal_tilde_weights(&a.a1)?;
    let w2_star = optimal_tilde_weights(&a.a2)?;
    let factor1 = a.a1.quadratic_form(w1_star.as_slice());
    let factor2 = a.a2.quadratic_form(w2_star.as_slice());
    Ok(KernelWeights {
        w1_star,
        w2_star,
        factor1,
        factor2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiner::combine_known_scale;

    fn hand() -> RegressionSample {
        RegressionSample::new(vec![0.2, 0.5, 0.8], vec![1.0, 2.0, 4.0]).unwrap()
    }

    #[test]
    fn kernels_integrate_to_one() {
        for k in [KernelSpec::epanechnikov(), KernelSpec::gaussian()] {
            assert!(k.normalization_error().unwrap() < 1e-8);
            for u in [0.1, 0.5, 0.99, 2.0] {
                assert_eq!(k.eval(u), k.eval(-u));
            }
            let r = k.reach();
            let mu2 = integrate(|u| u * u * k.eval(u), -r, r, 1e-12).unwrap();
            assert!((mu2 - k.mu2()).abs() < 1e-8);
        }
    }

    #[test]
    fn nw_hand_case() {
        let k = KernelSpec::epanechnikov();
        let r = nw_estimate(&hand(), 0.5, 0.4, &k).unwrap();
        let expected = (0.328125 * 1.0 + 0.75 * 2.0 + 0.328125 * 4.0) / 1.40625;
        assert!((r - expected).abs() < 1e-14);
        assert!((r - 2.233_333_333_333_333).abs() < 1e-12);
        // Only the middle point is inside a window of half-width 0.1.
        assert_eq!(nw_estimate(&hand(), 0.5, 0.1, &k).unwrap(), 2.0);
        assert!(matches!(
            nw_estimate(&hand(), 0.35, 0.01, &KernelSpec::epanechnikov()),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn clc_hand_case() {
        let k = KernelSpec::epanechnikov();
        let s = hand();
        assert_eq!(clc_estimate(&s, 0.5, &[0.4], &k).unwrap(), nw_estimate(&s, 0.5, 0.4, &k).unwrap());
        // h = 0.6: u = ±0.5 → 0.5625; u = 0 → 0.75
        let num = 0.328125 * 1.0 + 0.75 * 2.0 + 0.328125 * 4.0 + 0.5625 * 1.0 + 0.75 * 2.0 + 0.5625 * 4.0;
        let den = 1.40625 + 1.875;
        let r = clc_estimate(&s, 0.5, &[0.4, 0.6], &k).unwrap();
        assert!((r - num / den).abs() < 1e-14);
    }

    #[test]
    fn constant_responses() {
        let s = RegressionSample::new(vec![0.1, 0.3, 0.45, 0.6, 0.9], vec![3.5; 5]).unwrap();
        let k = KernelSpec::epanechnikov();
        let sched = BandwidthSchedule::new(0.2, vec![0.5, 0.7], 5).unwrap();
        let w = WeightVector::equal(2);
        assert!((nw_estimate(&s, 0.4, 0.3, &k).unwrap() - 3.5).abs() < 1e-14);
        assert!((clc_estimate(&s, 0.4, &[0.2, 0.3], &k).unwrap() - 3.5).abs() < 1e-14);
        assert!((ace_r1(&s, 0.4, &sched, &w, &k).unwrap() - 3.5).abs() < 1e-12);
        for mode in [ResidualMode::Literal, ResidualMode::LeaveOneOut] {
            assert!(xi_hat_nw(&s, 0.4, 0.5, &sched, &k, mode).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn literal_correction_vanishes() {
        let s = hand();
        let k = KernelSpec::epanechnikov();
        let sched = BandwidthSchedule::new(0.2, vec![0.4, 0.6], 3).unwrap();
        for tau in [0.4, 0.6] {
            assert!(xi_hat_nw(&s, 0.5, tau, &sched, &k, ResidualMode::Literal).unwrap().abs() < 1e-14);
        }
        let w = WeightVector::equal(2);
        let r2 = ace_r2(&s, 0.5, &sched, &w, &k, ResidualMode::Literal).unwrap();
        let mean = nw_fits(&s, 0.5, &sched, &k).unwrap().iter().sum::<f64>() / 2.0;
        assert!((r2 - mean).abs() < 1e-14);
    }

    /// Direct leave-one-out recomputation.
    fn loo_oracle(s: &RegressionSample, x: f64, h: f64, k: &KernelSpec) -> f64 {
        let kw: Vec<f64> = s.xs.iter().map(|&xi| k.eval((xi - x) / h)).collect();
        let total: f64 = kw.iter().sum();
        let mut acc = 0.0;
        for i in 0..s.n() {
            let (mut num, mut den) = (0.0, 0.0);
            for j in (0..s.n()).filter(|&j| j != i) {
                num += kw[j] * s.ys[j];
                den += kw[j];
            }
            if kw[i] > 0.0 && den > 0.0 {
                acc += kw[i] * (s.ys[i] - num / den);
            }
        }
        acc / total
    }

    #[test]
    fn leave_one_out_hand_case() {
        let s = hand();
        let k = KernelSpec::epanechnikov();
        // h = τ n^{-η} = 0.4 with n = 1
        let sched = BandwidthSchedule::new(0.5, vec![0.4], 1).unwrap();
        let xi = xi_hat_nw(&s, 0.5, 0.4, &sched, &k, ResidualMode::LeaveOneOut).unwrap();
        // fits without i: (2·0.75 + 4·0.328125)/1.078125, (1+4)/2, (1·0.328125 + 2·0.75)/1.078125
        let f0 = (1.5 + 1.3125) / 1.078125;
        let f2 = (0.328125 + 1.5) / 1.078125;
        let expected = (0.328125 * (1.0 - f0) + 0.75 * (2.0 - 2.5) + 0.328125 * (4.0 - f2)) / 1.40625;
        assert!((xi - expected).abs() < 1e-14);
        assert!(xi.abs() > 1e-3);
        assert!((xi - loo_oracle(&s, 0.5, 0.4, &k)).abs() < 1e-14);

        let w = WeightVector::equal(1);
        let r2 = ace_r2(&s, 0.5, &sched, &w, &k, ResidualMode::LeaveOneOut).unwrap();
        let direct = nw_estimate(&s, 0.5, 0.4, &k).unwrap() - xi;
        assert!((r2 - direct).abs() < 1e-14);
    }

    #[test]
    fn r1_matches_combiner_hand_case() {
        // h_k = τ_k for n = 1; windows cover every point.
        let s = RegressionSample::new(vec![0.3, 0.5, 0.7], vec![1.0, 2.0, 3.0]).unwrap();
        let k = KernelSpec::gaussian();
        let sched = BandwidthSchedule::new(0.5, vec![1.0, 3f64.sqrt()], 1).unwrap();
        let w = WeightVector::equal(2);
        let fits = nw_fits(&s, 0.4, &sched, &k).unwrap();
        let est = InitialEstimateSet::new(sched.taus().to_vec(), fits.clone(), vec![1.0, 3.0]).unwrap();
        let via_combiner = combine_unknown_scale(&est, &w).unwrap().theta_tilde;
        assert!((ace_r1(&s, 0.4, &sched, &w, &k).unwrap() - via_combiner).abs() < 1e-12);
        let xi = [
            xi_hat_nw(&s, 0.4, 1.0, &sched, &k, ResidualMode::LeaveOneOut).unwrap(),
            xi_hat_nw(&s, 0.4, 3f64.sqrt(), &sched, &k, ResidualMode::LeaveOneOut).unwrap(),
        ];
        let est = InitialEstimateSet::new(sched.taus().to_vec(), fits, xi.to_vec()).unwrap();
        let known = combine_known_scale(&est, &w, 1.0).unwrap().theta_tilde;
        let r2 = ace_r2(&s, 0.4, &sched, &w, &k, ResidualMode::LeaveOneOut).unwrap();
        assert!((r2 - known).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        assert!(BandwidthSchedule::new(0.0, vec![1.0], 10).is_err());
        assert!(BandwidthSchedule::new(0.2, vec![1.0, 1.0], 10).is_err());
        assert!(BandwidthSchedule::new(0.2, vec![-1.0], 10).is_err());
        let sched = BandwidthSchedule::around(0.1, &[0.5, 1.0, 2.0], 0.2, 100).unwrap();
        let hs = sched.bandwidths();
        assert!((hs[1] - 0.1).abs() < 1e-15 && (hs[2] - 0.2).abs() < 1e-15);
        assert!(sched.check_range(0.9).is_ok());
        assert!(sched.check_range(0.15).is_err());
    }

    #[test]
    fn cv_single_grid_point_and_oracle() {
        let xs: Vec<f64> = (1..=40).map(|i| i as f64 / 41.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let s = RegressionSample::new(xs.clone(), ys.clone()).unwrap();
        let k = KernelSpec::epanechnikov();
        assert_eq!(cv_bandwidth(&s, 2, &[0.2], &k).unwrap(), 0.2);

        let grid: Vec<f64> = (1..=10).map(|i| 0.02 * i as f64).collect();
        let h = cv_bandwidth(&s, 2, &grid, &k).unwrap();
        // Independent recomputation: even ranks predict odd ranks and vice versa.
        let objective = |h: f64| {
            let (mut sse, mut cnt) = (0.0, 0);
            for i in 0..40 {
                let (mut num, mut den) = (0.0, 0.0);
                for j in (0..40).filter(|j| j % 2 != i % 2) {
                    let kv = k.eval((xs[j] - xs[i]) / h);
                    num += kv * ys[j];
                    den += kv;
                }
                if den > 0.0 {
                    sse += (ys[i] - num / den).powi(2);
                    cnt += 1;
                }
            }
            sse / cnt as f64
        };
        let best = grid.iter().cloned().fold((f64::NAN, f64::INFINITY), |(bh, be), g| {
            let e = objective(g);
            if e < be {
                (g, e)
            } else {
                (bh, be)
            }
        });
        assert_eq!(h, best.0);
    }

    #[test]
    fn cv_all_empty() {
        let s = RegressionSample::new(vec![0.1, 0.9], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            cv_bandwidth(&s, 2, &[0.05], &KernelSpec::epanechnikov()),
            Err(Error::AllWindowsEmpty)
        ));
    }

    #[test]
    fn a_matrix_examples() {
        let g = KernelSpec::gaussian();
        let a = a_matrices(&[1.0], &g, None).unwrap();
        assert!((a.a2[(0, 0)] - 1.0 / (2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-15);
        assert_eq!(a.s, vec![1.0]);

        let a = a_matrices(&[1.0, 2.0], &g, None).unwrap();
        let closed = FRAC_1_SQRT_2PI / 5f64.sqrt();
        assert!((a.a2[(0, 1)] - closed).abs() < 1e-15);
        assert!((a2_entry_quadrature(1.0, 2.0, &g).unwrap() - closed).abs() < 1e-8);
        assert!(a.a2.is_symmetric(0.0));

        let e = KernelSpec::epanechnikov();
        let a = a_matrices(&[1.0, 1.0], &e, None).unwrap();
        assert!((a.a2[(0, 0)] - 0.6).abs() < 1e-10);
        assert_eq!(a.s, vec![1.0, 1.0]);
    }

    #[test]
    fn gaussian_closed_form_matches_quadrature() {
        let g = KernelSpec::gaussian();
        for &(a, b) in &[(0.3, 0.3), (0.5, 1.7), (2.0, 0.8), (1.1, 1.2)] {
            let q = a2_entry_quadrature(a, b, &g).unwrap();
            assert!((q - a2_entry(a, b, &g).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn regenerated_factors_alongside() {
        let w = WeightVector::equal(3);
        let a = a_matrices(&[0.8, 1.0, 1.25], &KernelSpec::gaussian(), Some(&w)).unwrap();
        let g = a.g.unwrap();
        let sq = [0.64, 1.0, 1.5625];
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(g.iter().zip(sq).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn weight_vectors() {
        let g = KernelSpec::gaussian();
        let kw = kernel_weight_vectors(&[1.0], &g).unwrap();
        assert_eq!(kw.w2_star.as_slice(), &[1.0]);
        assert!((kw.factor2 - 1.0 / (2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-15);

        let kw = kernel_weight_vectors(&[0.8, 1.25], &g).unwrap();
        assert!(kw.factor2 < 1.0 / (2.0 * std::f64::consts::PI.sqrt()));
        for w in [&kw.w1_star, &kw.w2_star] {
            assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_weights_beat_simplex_grid() {
        let taus = [0.7, 1.0, 1.4];
        let g = KernelSpec::gaussian();
        let a = a_matrices(&taus, &g, None).unwrap();
        let kw = kernel_weight_vectors(&taus, &g).unwrap();
        let best = a.a2.quadratic_form(kw.w2_star.as_slice());
        for i in -100..=300 {
            for j in -200..=200 {
                let (w0, w1) = (i as f64 * 0.01, j as f64 * 0.01);
                let w = [w0, w1, 1.0 - w0 - w1];
                assert!(best <= a.a2.quadratic_form(&w) + 1e-12);
            }
        }
    }
}
