//! Blockwise empirical Euclidean likelihood for a scalar parameter under
//! serially dependent data, and the composite estimator across block
//! separations.

use serde::{Deserialize, Serialize};

use crate::combiner::{combine_unknown_scale, InitialEstimateSet, WeightVector};
use crate::error::{Error, Result};
use crate::numerics::minimize_scalar;

/// Absorbs rounding in `n^{1-c}` before taking floors.
const FLOOR_SLACK: f64 = 1e-9;
pub const FIT_TOLERANCE: f64 = 1e-8;

/// Overlapping blocks of width `M = ⌊n^{1-c}⌋` starting every
/// `L = ⌊τ n^{1-c}⌋` observations; `Q = ⌊(n-M)/L⌋ + 1` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockScheme {
    pub n: usize,
    pub c: f64,
    pub tau: f64,
    pub window: usize,
    pub separation: usize,
    pub blocks: usize,
}

impl BlockScheme {
    /// Zero-based index range of block `i` (zero-based).
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        let start = i * self.separation;
        start..start + self.window
    }
}

pub fn make_blocks(n: usize, c: f64, tau: f64) -> Result<BlockScheme> {
    if n < 4 {
        return Err(Error::InvalidScheme(format!("n = {n} is below 4")));
    }
    if !(c > 0.0 && c <= 1.0) || !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidScheme(format!("c = {c} and tau = {tau} must lie in (0, 1]")));
    }
    let base = (n as f64).powf(1.0 - c);
    let window = (base + FLOOR_SLACK).floor() as usize;
    let separation = (tau * base + FLOOR_SLACK).floor() as usize;
    if window == 0 || separation == 0 {
        return Err(Error::InvalidScheme(format!(
            "n = {n}, c = {c}, tau = {tau} give M = {window}, L = {separation}"
        )));
    }
    let blocks = (n - window.min(n)) / separation + 1;
    if blocks < 2 || window > n {
        return Err(Error::InvalidScheme(format!(
            "n = {n}, c = {c}, tau = {tau} give only {blocks} block(s)"
        )));
    }
    Ok(BlockScheme {
        n,
        c,
        tau,
        window,
        separation,
        blocks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
    a: Option<f64>,
}

impl DependentSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, a: Option<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch(format!("{} xs for {} ys", xs.len(), ys.len())));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sample must be finite".into()));
        }
        if a.is_some_and(|a| !(a.abs() < 1.0)) {
            return Err(Error::InvalidInput("autoregressive coefficient must satisfy |a| < 1".into()));
        }
        Ok(Self { xs, ys, a })
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

    pub fn a(&self) -> Option<f64> {
        self.a
    }

    /// `Σxy / Σx²`.
    pub fn least_squares(&self) -> Result<f64> {
        let sxx: f64 = self.xs.iter().map(|x| x * x).sum();
        if sxx == 0.0 {
            return Err(Error::DegenerateDesign("all covariates are zero".into()));
        }
        Ok(self.xs.iter().zip(&self.ys).map(|(x, y)| x * y).sum::<f64>() / sxx)
    }
}

/// Unbiased estimating function `u(x, y; θ)`.
pub trait EstimatingFunction {
    fn value(&self, x: f64, y: f64, theta: f64) -> f64;

    /// `(a, b)` with `u(x, y; θ) = a - θb`, when `u` is affine in `θ`.
    fn linear_parts(&self, _x: f64, _y: f64) -> Option<(f64, f64)> {
        None
    }
}

/// `u(x, y; θ) = x(y - θx)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearScore;

impl EstimatingFunction for LinearScore {
    fn value(&self, x: f64, y: f64, theta: f64) -> f64 {
        x * (y - theta * x)
    }

    fn linear_parts(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        Some((x * y, x * x))
    }
}

/// Block means `U_i(θ) = A_i - θB_i` of an affine estimating function,
/// summarized by means and centered cross-products over blocks.
#[derive(Debug, Clone, Copy)]
struct LinearStats {
    mean_a: f64,
    mean_b: f64,
    caa: f64,
    cab: f64,
    cbb: f64,
}

impl LinearStats {
    fn new(a: &[f64], b: &[f64]) -> Self {
        let q = a.len() as f64;
        let mean_a = a.iter().sum::<f64>() / q;
        let mean_b = b.iter().sum::<f64>() / q;
        let (mut caa, mut cab, mut cbb) = (0.0, 0.0, 0.0);
        for (&ai, &bi) in a.iter().zip(b) {
            let (da, db) = (ai - mean_a, bi - mean_b);
            caa += da * da;
            cab += da * db;
            cbb += db * db;
        }
        Self {
            mean_a,
            mean_b,
            caa: caa / q,
            cab: cab / q,
            cbb: cbb / q,
        }
    }
}

/// Per-block moments `U_i(θ)`, their mean `Ū(θ)` and spread `S(θ)` over the
/// included blocks.
pub struct BlockMoments<'a> {
    sample: &'a DependentSample,
    scheme: BlockScheme,
    func: &'a dyn EstimatingFunction,
    included: Vec<usize>,
    /// Per-block `(A_i, B_i)` over all blocks, when `u` is affine.
    parts: Option<(Vec<f64>, Vec<f64>)>,
    stats: Option<LinearStats>,
}

pub fn block_moments<'a>(
    s: &'a DependentSample,
    scheme: BlockScheme,
    func: &'a dyn EstimatingFunction,
) -> Result<BlockMoments<'a>> {
    if scheme.n != s.n() {
        return Err(Error::InvalidScheme(format!(
            "scheme for n = {} applied to {} observations",
            scheme.n,
            s.n()
        )));
    }
    debug_assert!((scheme.blocks - 1) * scheme.separation + scheme.window <= scheme.n);
    let m = scheme.window as f64;
    let parts = (0..scheme.blocks)
        .map(|i| {
            scheme.block(i).try_fold((0.0, 0.0), |(sa, sb), j| {
                func.linear_parts(s.xs[j], s.ys[j]).map(|(a, b)| (sa + a, sb + b))
            })
        })
        .collect::<Option<Vec<_>>>()
        .map(|v| v.into_iter().map(|(a, b)| (a / m, b / m)).unzip::<_, _, Vec<f64>, Vec<f64>>());
    let mut bm = BlockMoments {
        sample: s,
        scheme,
        func,
        included: (0..scheme.blocks).collect(),
        parts,
        stats: None,
    };
    bm.refresh();
    Ok(bm)
}

impl BlockMoments<'_> {
    fn refresh(&mut self) {
        self.stats = self.parts.as_ref().map(|(a, b)| {
            let a: Vec<f64> = self.included.iter().map(|&i| a[i]).collect();
            let b: Vec<f64> = self.included.iter().map(|&i| b[i]).collect();
            LinearStats::new(&a, &b)
        });
    }

    pub fn scheme(&self) -> &BlockScheme {
        &self.scheme
    }

    /// Number of included blocks.
    pub fn q(&self) -> usize {
        self.included.len()
    }

    pub fn block_value(&self, i: usize, theta: f64) -> f64 {
        match &self.parts {
            Some((a, b)) => a[i] - theta * b[i],
            None => {
                let r = self.scheme.block(i);
                let m = r.len() as f64;
                r.map(|j| self.func.value(self.sample.xs[j], self.sample.ys[j], theta))
                    .sum::<f64>()
                    / m
            }
        }
    }

    /// `U_i(θ)` over the included blocks, in block order.
    pub fn block_values(&self, theta: f64) -> Vec<f64> {
        self.included.iter().map(|&i| self.block_value(i, theta)).collect()
    }

    pub fn u_bar(&self, theta: f64) -> f64 {
        match &self.stats {
            Some(st) => st.mean_a - theta * st.mean_b,
            None => {
                let v = self.block_values(theta);
                v.iter().sum::<f64>() / v.len() as f64
            }
        }
    }

    pub fn s(&self, theta: f64) -> f64 {
        match &self.stats {
            Some(st) => {
                let cross = 2.0 * theta * st.cab;
                let s = st.caa - cross + theta * theta * st.cbb;
                // Recompute directly when cancellation dominates.
                if s > 1e-10 * (st.caa + cross.abs() + theta * theta * st.cbb) {
                    s
                } else {
                    self.direct_spread(theta)
                }
            }
            None => self.direct_spread(theta),
        }
    }

    fn direct_spread(&self, theta: f64) -> f64 {
        let v = self.block_values(theta);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / v.len() as f64
    }

    /// Root `Ā/B̄` of `Ū` for an affine estimating function.
    pub fn linear_root(&self) -> Option<f64> {
        self.stats
            .filter(|st| st.mean_b != 0.0)
            .map(|st| st.mean_a / st.mean_b)
    }

    /// The same moments with block `i` left out.
    pub fn without_block(&self, i: usize) -> Self {
        let mut out = BlockMoments {
            sample: self.sample,
            scheme: self.scheme,
            func: self.func,
            included: self.included.iter().copied().filter(|&j| j != i).collect(),
            parts: self.parts.clone(),
            stats: None,
        };
        out.refresh();
        out
    }
}

/// `l(θ) = -(Q/2) Ū²(θ)/S(θ)`, or `-(Q/2) Ū²(θ)` when `S` is ignored.
pub fn el_ratio(bm: &BlockMoments, theta: f64, use_s: bool) -> Result<f64> {
    let u = bm.u_bar(theta);
    let q = bm.q() as f64;
    if !use_s {
        return Ok(-0.5 * q * u * u);
    }
    let s = bm.s(theta);
    if !(s > 1e-12 * u * u + 1e-300) {
        return Err(Error::DegenerateVariance { theta });
    }
    Ok(-0.5 * q * u * u / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// One-dimensional maximization of the likelihood ratio over the bracket.
    #[default]
    Optimize,
    /// Root of the affine `Ū`.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeleOptions {
    pub use_s: bool,
    pub method: FitMethod,
}

impl Default for BeleOptions {
    fn default() -> Self {
        Self {
            use_s: true,
            method: FitMethod::Optimize,
        }
    }
}

/// `argmax_{θ ∈ bracket} l(θ)`.
pub fn bele_fit(bm: &BlockMoments, bracket: (f64, f64), opts: BeleOptions) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("bad bracket ({lo}, {hi})")));
    }
    match opts.method {
        FitMethod::ClosedForm => bm
            .linear_root()
            .ok_or_else(|| Error::InvalidInput("closed-form fit needs an affine estimating function".into())),
        FitMethod::Optimize => {
            let mut failure = None;
            let theta = minimize_scalar(
                |t| match el_ratio(bm, t, opts.use_s) {
                    Ok(l) => -l,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                lo,
                hi,
                FIT_TOLERANCE,
            );
            match failure {
                Some(e) => Err(e),
                None => Ok(theta),
            }
        }
    }
}

/// `θ_OLS ± 10(1 + |θ_OLS|)`.
pub fn default_bracket(s: &DependentSample) -> Result<(f64, f64)> {
    let t = s.least_squares()?;
    let half = 10.0 * (1.0 + t.abs());
    Ok((t - half, t + half))
}

/// Leave-block-out criterion `mean_i U_i(θ̂_{(-i)})²` for each separation
/// level in `grid`.
pub fn cv_curve(
    s: &DependentSample,
    c: f64,
    grid: &[f64],
    func: &dyn EstimatingFunction,
    bracket: (f64, f64),
    opts: BeleOptions,
) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&tau| {
            let scheme = make_blocks(s.n(), c, tau)?;
            let bm = block_moments(s, scheme, func)?;
            let mut total = 0.0;
            for i in 0..scheme.blocks {
                let theta = bele_fit(&bm.without_block(i), bracket, opts)?;
                total += bm.block_value(i, theta).powi(2);
            }
            Ok(total / scheme.blocks as f64)
        })
        .collect()
}

/// Grid level minimizing [`cv_curve`]; ties go to the smaller level.
pub fn cv_tau(
    s: &DependentSample,
    c: f64,
    grid: &[f64],
    func: &dyn EstimatingFunction,
    bracket: (f64, f64),
    opts: BeleOptions,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty level grid".into()));
    }
    let curve = cv_curve(s, c, grid, func, bracket, opts)?;
    let mut best = (grid[0], curve[0]);
    for (&tau, &e) in grid.iter().zip(&curve).skip(1) {
        if e < best.1 || (e == best.1 && tau < best.0) {
            best = (tau, e);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AceBel {
    pub theta_tilde: f64,
    pub theta_hats: Vec<f64>,
    pub xi_hats: Vec<f64>,
    /// The correction was negligible and the weighted mean was returned.
    pub fallback: bool,
}

/// Composite estimate from per-level fits `θ̂_k` and `ξ̂_k`. When
/// `max|ξ̂_k| ≤ 1e-10(1 + max|θ̂_k|)` the weighted mean `Σ w_k θ̂_k` is
/// returned.
pub fn ace_from_fits(taus: &[f64], theta_hats: &[f64], xi_hats: &[f64], w: &WeightVector) -> Result<AceBel> {
    let theta_scale = theta_hats.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let xi_scale = xi_hats.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (theta_tilde, fallback) = if xi_scale <= 1e-10 * (1.0 + theta_scale) {
        if w.len() != theta_hats.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} estimates",
                w.len(),
                theta_hats.len()
            )));
        }
        (w.as_slice().iter().zip(theta_hats).map(|(a, b)| a * b).sum(), true)
    } else {
        let est = InitialEstimateSet::new(taus.to_vec(), theta_hats.to_vec(), xi_hats.to_vec())?;
        (combine_unknown_scale(&est, w)?.theta_tilde, false)
    };
    Ok(AceBel {
        theta_tilde,
        theta_hats: theta_hats.to_vec(),
        xi_hats: xi_hats.to_vec(),
        fallback,
    })
}

/// Fits `θ̂_k` at each level and combines them with `ξ̂_k = √n Ū(θ̂_k, τ_k)`.
pub fn ace_bel(
    s: &DependentSample,
    c: f64,
    taus: &[f64],
    w: &WeightVector,
    func: &dyn EstimatingFunction,
    bracket: (f64, f64),
    opts: BeleOptions,
) -> Result<AceBel> {
    let root_n = (s.n() as f64).sqrt();
    let mut thetas = Vec::with_capacity(taus.len());
    let mut xis = Vec::with_capacity(taus.len());
    for &tau in taus {
        let bm = block_moments(s, make_blocks(s.n(), c, tau)?, func)?;
        let theta = bele_fit(&bm, bracket, opts)?;
        xis.push(root_n * bm.u_bar(theta));
        thetas.push(theta);
    }
    ace_from_fits(taus, &thetas, &xis, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_examples() {
        let s = make_blocks(100, 1.0 / 3.0, 1.0).unwrap();
        assert_eq!((s.window, s.separation, s.blocks), (21, 21, 4));
        let s = make_blocks(100, 1.0 / 3.0, 0.5).unwrap();
        assert_eq!((s.window, s.separation, s.blocks), (21, 10, 8));
        let s = make_blocks(4, 0.5, 1.0).unwrap();
        assert_eq!((s.window, s.separation, s.blocks), (2, 2, 2));
        // 27^{2/3} = 9 exactly in real arithmetic.
        assert_eq!(make_blocks(27, 1.0 / 3.0, 1.0).unwrap().window, 9);
    }

    #[test]
    fn scheme_errors() {
        assert!(matches!(make_blocks(3, 0.5, 1.0), Err(Error::InvalidScheme(_))));
        assert!(matches!(make_blocks(100, 0.5, 0.05), Err(Error::InvalidScheme(_))));
        // M = n leaves a single block.
        assert!(matches!(make_blocks(10, 1e-12, 1.0), Err(Error::InvalidScheme(_))));
    }

    fn hand() -> DependentSample {
        DependentSample::new(vec![1.0, 2.0, -1.0, 1.0], vec![2.0, 3.0, 0.0, 4.0], None).unwrap()
    }

    #[test]
    fn hand_two_blocks() {
        let s = hand();
        let scheme = make_blocks(4, 0.5, 1.0).unwrap();
        let bm = block_moments(&s, scheme, &LinearScore).unwrap();
        // Block 1: (1·2 + 2·3)/2 - θ(1 + 4)/2 = 4 - 2.5θ
        // Block 2: (0 + 4)/2 - θ(1 + 1)/2 = 2 - θ
        assert_eq!(bm.block_values(0.0), vec![4.0, 2.0]);
        assert_eq!(bm.block_values(1.0), vec![1.5, 1.0]);
        assert!((bm.u_bar(0.0) - 3.0).abs() < 1e-15);
        assert!((bm.s(0.0) - 1.0).abs() < 1e-15);
        // l(0) = -(2/2)·9/1
        assert!((el_ratio(&bm, 0.0, true).unwrap() + 9.0).abs() < 1e-14);
        assert!((el_ratio(&bm, 0.0, false).unwrap() + 9.0).abs() < 1e-14);
        let theta = 1.0;
        let with = el_ratio(&bm, theta, true).unwrap();
        let without = el_ratio(&bm, theta, false).unwrap();
        assert!((with - without / bm.s(theta)).abs() < 1e-14);

        // Root of Ū = 3 - 1.75θ.
        let root = 3.0 / 1.75;
        assert!((bm.linear_root().unwrap() - root).abs() < 1e-15);
        assert_eq!(el_ratio(&bm, root, true).unwrap(), 0.0);
        // With two blocks S vanishes at θ = 4/3; brackets stay on one side.
        for (use_s, bracket) in [(true, (1.4, 5.0)), (false, (-5.0, 5.0))] {
            let opts = BeleOptions {
                use_s,
                method: FitMethod::Optimize,
            };
            let fit = bele_fit(&bm, bracket, opts).unwrap();
            assert!((fit - root).abs() < 1e-7, "{fit}");
            assert!(bm.u_bar(fit).abs() <= 1e-6 * (1.0 + bm.u_bar(bracket.0).abs()));
        }
    }

    #[test]
    fn general_path_matches_affine_path() {
        struct Opaque;
        impl EstimatingFunction for Opaque {
            fn value(&self, x: f64, y: f64, theta: f64) -> f64 {
                x * (y - theta * x)
            }
        }
        let xs: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64 / 5.0 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| 2.0 * x + (i as f64 * 0.9).sin()).collect();
        let s = DependentSample::new(xs, ys, Some(0.2)).unwrap();
        let scheme = make_blocks(30, 0.5, 0.6).unwrap();
        let a = block_moments(&s, scheme, &LinearScore).unwrap();
        let b = block_moments(&s, scheme, &Opaque).unwrap();
        for theta in [-1.0, 0.5, 2.0, 4.0] {
            assert!((a.u_bar(theta) - b.u_bar(theta)).abs() < 1e-12);
            assert!((a.s(theta) - b.s(theta)).abs() < 1e-12);
            let vals = a.block_values(theta);
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!((mean - a.u_bar(theta)).abs() < 1e-12);
        }
        let (a1, b1) = (a.without_block(2), b.without_block(2));
        assert_eq!(a1.q(), scheme.blocks - 1);
        assert!((a1.s(1.0) - b1.s(1.0)).abs() < 1e-12);
        assert!(matches!(
            bele_fit(&b, (-5.0, 5.0), BeleOptions { use_s: true, method: FitMethod::ClosedForm }),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn noiseless_fit() {
        // Dyadic covariates keep every product exact.
        let xs: Vec<f64> = (0..20).map(|i| ((i * 5) % 7 + 1) as f64 / 4.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x).collect();
        let s = DependentSample::new(xs, ys, None).unwrap();
        let bm = block_moments(&s, make_blocks(20, 0.5, 1.0).unwrap(), &LinearScore).unwrap();
        assert!(bm.block_values(5.0).iter().all(|&u| u == 0.0));
        assert_eq!(bm.s(5.0), 0.0);
        assert!(matches!(el_ratio(&bm, 5.0, true), Err(Error::DegenerateVariance { .. })));
        let opts = BeleOptions {
            use_s: false,
            method: FitMethod::Optimize,
        };
        let fit = bele_fit(&bm, default_bracket(&s).unwrap(), opts).unwrap();
        assert!((fit - 5.0).abs() < 1e-8);

        let taus = [0.5, 0.75, 1.0];
        let ace = ace_bel(&s, 0.5, &taus, &WeightVector::equal(3), &LinearScore, (0.0, 10.0), opts).unwrap();
        assert!(ace.fallback);
        assert!((ace.theta_tilde - 5.0).abs() < 1e-8);
    }

    #[test]
    fn planted_fits_match_combiner() {
        let taus = [0.4, 0.7, 1.0];
        let thetas = [2.0, 3.0, 5.0];
        let xis = [1.0, 2.0, 4.0];
        let w = WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let ace = ace_from_fits(&taus, &thetas, &xis, &w).unwrap();
        let est = InitialEstimateSet::new(taus.to_vec(), thetas.to_vec(), xis.to_vec()).unwrap();
        assert_eq!(ace.theta_tilde, combine_unknown_scale(&est, &w).unwrap().theta_tilde);
        assert!(!ace.fallback);
        // θ = 1 + ξ exactly.
        assert!((ace.theta_tilde - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shift_equivariance() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).sin() + 0.4).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| 2.5 * x + (i as f64 * 2.1).cos()).collect();
        let shifted: Vec<f64> = ys.iter().zip(&xs).map(|(y, x)| y + 0.75 * x).collect();
        let s0 = DependentSample::new(xs.clone(), ys, None).unwrap();
        let s1 = DependentSample::new(xs, shifted, None).unwrap();
        let scheme = make_blocks(40, 0.5, 0.5).unwrap();
        let r0 = block_moments(&s0, scheme, &LinearScore).unwrap().linear_root().unwrap();
        let r1 = block_moments(&s1, scheme, &LinearScore).unwrap().linear_root().unwrap();
        assert!((r1 - r0 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cv_picks_grid_level() {
        let xs: Vec<f64> = (0..60).map(|i| (i as f64 * 0.61).sin() + 0.3).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| 5.0 * x + (i as f64 * 1.7).cos()).collect();
        let s = DependentSample::new(xs, ys, None).unwrap();
        let grid = [0.4, 0.6, 0.8, 1.0];
        let bracket = default_bracket(&s).unwrap();
        let opts = BeleOptions::default();
        let curve = cv_curve(&s, 0.5, &grid, &LinearScore, bracket, opts).unwrap();
        assert!(curve.iter().all(|v| v.is_finite() && *v >= 0.0));
        let tau = cv_tau(&s, 0.5, &grid, &LinearScore, bracket, opts).unwrap();
        assert!(grid.contains(&tau));
        assert_eq!(cv_tau(&s, 0.5, &[0.6], &LinearScore, bracket, opts).unwrap(), 0.6);
    }
}
