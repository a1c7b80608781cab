//! Flat experiment configuration with per-experiment defaults.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::blockwise::FitMethod;
use crate::error::{Error, Result};
use crate::kernel::{KernelKind, ResidualMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Equal,
    Optimal,
}

/// Error density used to evaluate `f_e` at fitted intercepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMode {
    /// The unit exponential of the data-generating process.
    Known,
    /// Gaussian kernel estimate from median-regression residuals.
    Kde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AceVariant {
    R1,
    R2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: u8,
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub estimators: Vec<String>,
    pub weights: WeightMode,
    /// Keep fits that stopped on the optimization bracket instead of
    /// dropping the replication.
    pub keep_failures: bool,

    // Experiment 1
    pub taus: Vec<f64>,
    pub qr_tau: f64,
    pub density: DensityMode,

    // Experiment 2
    pub eta: f64,
    pub multipliers: Vec<f64>,
    pub cv_grid: Vec<f64>,
    pub folds: usize,
    pub kernel: KernelKind,
    pub ace_variant: AceVariant,
    pub residual_mode: ResidualMode,

    // Experiment 3
    pub method: u8,
    pub c: f64,
    /// Window width `⌊n^e⌋`; overrides `c` with `1 - e`.
    pub window_exponent: Option<f64>,
    pub theta: f64,
    pub a: f64,
    pub x_mean: f64,
    pub tau_grid: Vec<f64>,
    pub fit_method: FitMethod,
    pub burn_in: usize,
    pub innovation_sd: f64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_MULTIPLIERS: [f64; 5] = [0.8, 1.3, 1.8, 2.3, 2.8];

impl ExperimentConfig {
    pub fn defaults(experiment: u8, method: u8) -> Result<Self> {
        if !(1..=3).contains(&experiment) {
            return Err(Error::InvalidInput(format!("unknown experiment {experiment}")));
        }
        if !(1..=2).contains(&method) {
            return Err(Error::InvalidInput(format!("unknown method {method}")));
        }
        let names: &[&str] = match experiment {
            1 => &["ACE", "CQR", "QR"],
            2 => &["LC", "CLC", "ACE"],
            _ => &["BELE", "ACE"],
        };
        Ok(Self {
            experiment,
            n: 100,
            replications: 200,
            master_seed: DEFAULT_SEED,
            estimators: names.iter().map(|s| s.to_string()).collect(),
            weights: if experiment == 1 {
                WeightMode::Optimal
            } else {
                WeightMode::Equal
            },
            keep_failures: experiment == 3 && method == 2,
            taus: (1..=9).map(|k| k as f64 / 10.0).collect(),
            qr_tau: 0.5,
            density: DensityMode::Known,
            eta: 0.2,
            multipliers: DEFAULT_MULTIPLIERS.to_vec(),
            cv_grid: (2..=30).map(|i| i as f64 / 100.0).collect(),
            folds: 2,
            kernel: KernelKind::Epanechnikov,
            ace_variant: AceVariant::R1,
            residual_mode: ResidualMode::LeaveOneOut,
            method,
            c: if method == 1 { 1.0 / 3.0 } else { 0.5 },
            window_exponent: None,
            theta: if method == 1 { 5.0 } else { 2.5 },
            a: 0.1,
            x_mean: 0.0,
            tau_grid: vec![0.4, 0.6, 0.8, 1.0],
            fit_method: FitMethod::Optimize,
            burn_in: 0,
            innovation_sd: 1.0,
        })
    }

    /// Defaults for the `experiment` and `method` keys of `overlay`, with
    /// every key of `overlay` applied on top.
    pub fn from_overlay(overlay: &Map<String, Value>) -> Result<Self> {
        let experiment = small_int(overlay, "experiment")?
            .ok_or_else(|| Error::InvalidInput("missing key \"experiment\"".into()))?;
        let method = small_int(overlay, "method")?.unwrap_or(1);
        let base = Self::defaults(experiment, method)?;
        let Value::Object(mut merged) = serde_json::to_value(&base).expect("config serializes") else {
            unreachable!("config serializes to an object")
        };
        for (k, v) in overlay {
            merged.insert(k.clone(), v.clone());
        }
        let cfg: Self =
            serde_json::from_value(Value::Object(merged)).map_err(|e| Error::InvalidInput(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Block-width exponent `c` after applying `window_exponent`.
    pub fn effective_c(&self) -> f64 {
        self.window_exponent.map_or(self.c, |e| 1.0 - e)
    }

    pub fn use_s(&self) -> bool {
        self.method == 1
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if !(1..=3).contains(&self.experiment) {
            return fail(format!("unknown experiment {}", self.experiment));
        }
        if self.replications < 1 {
            return fail("replications must be at least 1".into());
        }
        if self.n < 10 {
            return fail(format!("n = {} is below 10", self.n));
        }
        let allowed: &[&str] = match self.experiment {
            1 => &["ACE", "CQR", "QR"],
            2 => &["LC", "CLC", "ACE"],
            _ => &["BELE", "ACE"],
        };
        if self.estimators.is_empty() {
            return fail("no estimators selected".into());
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if !allowed.contains(&e.as_str()) {
                return fail(format!("estimator {e} is not part of experiment {}", self.experiment));
            }
            if self.estimators[..i].contains(e) {
                return fail(format!("estimator {e} listed twice"));
            }
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        match self.experiment {
            1 => {
                if self.taus.len() < 2 || !increasing(&self.taus) || self.taus.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                    return fail("taus must be at least two increasing levels in (0, 1)".into());
                }
                if !(self.qr_tau > 0.0 && self.qr_tau < 1.0) {
                    return fail("qr_tau must lie in (0, 1)".into());
                }
            }
            2 => {
                if !(self.eta > 0.0 && self.eta < 1.0) {
                    return fail("eta must lie in (0, 1)".into());
                }
                if self.multipliers.is_empty()
                    || !increasing(&self.multipliers)
                    || self.multipliers.iter().any(|c| !(*c > 0.0))
                {
                    return fail("multipliers must be positive and increasing".into());
                }
                if self.ace_variant == AceVariant::R1 && self.multipliers.len() < 2 {
                    return fail("r1 needs at least two multipliers".into());
                }
                if self.cv_grid.is_empty() || self.cv_grid.iter().any(|h| !(*h > 0.0)) {
                    return fail("cv_grid must hold positive bandwidths".into());
                }
                if self.folds < 2 || self.folds > self.n {
                    return fail("folds must lie in [2, n]".into());
                }
            }
            _ => {
                if !(1..=2).contains(&self.method) {
                    return fail(format!("unknown method {}", self.method));
                }
                if !(self.a.abs() < 1.0) {
                    return fail("a must satisfy |a| < 1".into());
                }
                let c = self.effective_c();
                if !(c > 0.0 && c <= 1.0) {
                    return fail(format!("block exponent c = {c} is outside (0, 1]"));
                }
                if self.tau_grid.len() < 2
                    || !increasing(&self.tau_grid)
                    || self.tau_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0))
                {
                    return fail("tau_grid must be at least two increasing levels in (0, 1]".into());
                }
                if self.weights == WeightMode::Optimal {
                    return fail("experiment 3 supports equal weights only".into());
                }
                if !(self.innovation_sd >= 0.0) {
                    return fail("innovation_sd must be non-negative".into());
                }
            }
        }
        Ok(())
    }
}

fn small_int(map: &Map<String, Value>, key: &str) -> Result<Option<u8>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .and_then(|x| u8::try_from(x).ok())
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" must be a small integer"))),
    }
}
