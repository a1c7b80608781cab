//! Monte Carlo replication of the three experiments.
//!
//! Replication `r` draws from stream `r` of the master seed. Replications
//! may run on a worker pool; their results are collected in replication
//! order and reduced there, so a report does not depend on the pool size.

pub mod config;
pub mod generators;
pub mod rng;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockwise::{ace_bel, bele_fit, block_moments, cv_tau, default_bracket, make_blocks, BeleOptions, LinearScore};
use crate::combiner::WeightVector;
use crate::error::{Error, Result};
use crate::kernel::{ace_r1, ace_r2, clc_estimate, cv_bandwidth, kernel_weight_vectors, nw_estimate, BandwidthSchedule, KernelSpec};
use crate::quantile::{a0_matrix, ace_quantile_from_fits, fit_cqr, fit_quantile, optimal_qr_weights, ErrorDensity, QuantileFit};
pub use config::{AceVariant, DensityMode, ExperimentConfig, WeightMode};
use generators::{exp2_regression, gen_experiment1, gen_experiment2, gen_experiment3, Exp3Process, EXP1_BETA};
use rng::stream;

/// Failure share at or above which a run counts as failed.
pub const FAILURE_THRESHOLD: f64 = 0.05;

/// Densities at or below this make a quantile level unusable.
const MIN_DENSITY: f64 = 1e-12;

/// `x_j = j/100`, `j = 1..=99`.
pub fn mise_grid() -> Vec<f64> {
    (1..=99).map(|j| j as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub name: String,
    /// Mean of `θ̂ - θ` per coordinate; empty for curve estimators.
    pub bias: Vec<f64>,
    /// Mean of `(θ̂ - θ)²` per coordinate; empty for curve estimators.
    pub mse: Vec<f64>,
    pub mise: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub experiment: u8,
    pub n: usize,
    pub replications: usize,
    pub completed: usize,
    pub failures: usize,
    pub failure_kinds: BTreeMap<String, usize>,
    /// Composite fits that fell back to the weighted mean.
    pub fallbacks: usize,
    pub estimators: Vec<EstimatorSummary>,
    pub wall_time_secs: f64,
}

impl MonteCarloReport {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.replications as f64
    }

    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.name == name)
    }

    /// Equality of everything except wall time.
    pub fn same_results(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self {
            wall_time_secs: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

/// One completed replication: per estimator, the estimate vector
/// (parametric) or the single integrated squared error (curve).
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub values: Vec<Vec<f64>>,
    pub fallback: bool,
}

/// Worker count from `ACR_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("ACR_THREADS").ok()?.trim().parse().ok().filter(|&t| t > 0)
}

pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<MonteCarloReport> {
    run_monte_carlo_with_threads(cfg, threads_from_env())
}

pub fn run_monte_carlo_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<MonteCarloReport> {
    let started = Instant::now();
    let outcomes = run_replications(cfg, threads)?;
    let mut report = summarize(cfg, &outcomes)?;
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Per-replication results in replication order.
pub fn run_replications(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<Result<Replication>>> {
    cfg.validate()?;
    let ctx = Context::new(cfg)?;
    let work = || {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| ctx.replicate(r as u64))
            .collect::<Vec<_>>()
    };
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Reduces replication results in order. Failed replications are counted
/// and excluded from every estimator.
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[Result<Replication>]) -> Result<MonteCarloReport> {
    let mut failure_kinds = BTreeMap::new();
    let mut done = Vec::new();
    for o in outcomes {
        match o {
            Ok(rep) => done.push(rep),
            Err(e) => *failure_kinds.entry(e.kind().to_string()).or_insert(0) += 1,
        }
    }
    if done.is_empty() {
        return Err(Error::AllReplicationsFailed(outcomes.len()));
    }
    let truth: Vec<f64> = match cfg.experiment {
        1 => EXP1_BETA.to_vec(),
        3 => vec![cfg.theta],
        _ => Vec::new(),
    };
    let estimators = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(e, name)| {
            if cfg.experiment == 2 {
                let ise: Vec<f64> = done.iter().map(|r| r.values[e][0]).collect();
                EstimatorSummary {
                    name: name.clone(),
                    bias: Vec::new(),
                    mse: Vec::new(),
                    mise: Some(pairwise_sum(&ise) / ise.len() as f64),
                }
            } else {
                let r = done.len() as f64;
                let (bias, mse) = truth
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| {
                        let err: Vec<f64> = done.iter().map(|rep| rep.values[e][j] - t).collect();
                        let sq: Vec<f64> = err.iter().map(|d| d * d).collect();
                        (pairwise_sum(&err) / r, pairwise_sum(&sq) / r)
                    })
                    .unzip();
                EstimatorSummary {
                    name: name.clone(),
                    bias,
                    mse,
                    mise: None,
                }
            }
        })
        .collect();
    Ok(MonteCarloReport {
        experiment: cfg.experiment,
        n: cfg.n,
        replications: outcomes.len(),
        completed: done.len(),
        failures: outcomes.len() - done.len(),
        failure_kinds,
        fallbacks: done.iter().filter(|r| r.fallback).count(),
        estimators,
        wall_time_secs: 0.0,
    })
}

/// Pairwise summation in index order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Run-wide quantities computed once.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    /// Composite weights fixed for the whole run.
    weights: Option<WeightVector>,
    kernel: KernelSpec,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let kernel = KernelSpec { kind: cfg.kernel };
        let weights = match (cfg.experiment, cfg.weights) {
            (1, WeightMode::Optimal) => None,
            (1, WeightMode::Equal) => Some(WeightVector::equal(cfg.taus.len())),
            (2, WeightMode::Equal) => Some(WeightVector::equal(cfg.multipliers.len())),
            // Depend only on the ratios of the levels, hence on the multipliers.
            (2, WeightMode::Optimal) => {
                let kw = kernel_weight_vectors(&cfg.multipliers, &kernel)?;
                Some(match cfg.ace_variant {
                    AceVariant::R1 => kw.w1_star,
                    AceVariant::R2 => kw.w2_star,
                })
            }
            _ => Some(WeightVector::equal(cfg.tau_grid.len())),
        };
        Ok(Self { cfg, weights, kernel })
    }

    fn replicate(&self, r: u64) -> Result<Replication> {
        let mut rng = stream(self.cfg.master_seed, r);
        match self.cfg.experiment {
            1 => self.experiment1(&mut rng),
            2 => self.experiment2(&mut rng),
            _ => self.experiment3(&mut rng),
        }
    }

    fn experiment1(&self, rng: &mut rng::RngStream) -> Result<Replication> {
        let cfg = self.cfg;
        let data = gen_experiment1(cfg.n, rng)?;
        let mut qr: Option<QuantileFit> = None;
        let mut values = Vec::with_capacity(cfg.estimators.len());
        for name in &cfg.estimators {
            let est = match name.as_str() {
                "QR" => {
                    let fit = fit_quantile(&data, cfg.qr_tau)?;
                    let beta = fit.beta.clone();
                    qr = Some(fit);
                    beta
                }
                "CQR" => fit_cqr(&data, &cfg.taus)?.beta,
                _ => {
                    let fits = cfg
                        .taus
                        .iter()
                        .map(|&t| match &qr {
                            Some(f) if f.tau == t => Ok(f.clone()),
                            _ => fit_quantile(&data, t),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let fe = match cfg.density {
                        DensityMode::Known => ErrorDensity::exponential(),
                        DensityMode::Kde => {
                            let median = match fits.iter().find(|f| f.tau == 0.5) {
                                Some(f) => f.clone(),
                                None => fit_quantile(&data, 0.5)?,
                            };
                            let shifted: Vec<f64> = median
                                .residuals(&data)
                                .iter()
                                .map(|r| r + median.intercept)
                                .collect();
                            ErrorDensity::gaussian_kde(&shifted)?
                        }
                    };
                    let w = match &self.weights {
                        Some(w) => w.clone(),
                        None => {
                            let fq = fits
                                .iter()
                                .map(|f| {
                                    let v = fe.eval(f.intercept);
                                    if v > MIN_DENSITY {
                                        Ok(v)
                                    } else {
                                        Err(Error::ZeroDensity {
                                            tau: f.tau,
                                            at: f.intercept,
                                        })
                                    }
                                })
                                .collect::<Result<Vec<_>>>()?;
                            optimal_qr_weights(&a0_matrix(&cfg.taus, &fq)?)?
                        }
                    };
                    ace_quantile_from_fits(&data, &fits, &w, &fe)?
                }
            };
            values.push(est);
        }
        Ok(Replication {
            values,
            fallback: false,
        })
    }

    fn experiment2(&self, rng: &mut rng::RngStream) -> Result<Replication> {
        let cfg = self.cfg;
        let k = &self.kernel;
        let sample = gen_experiment2(cfg.n, rng)?;
        let h = cv_bandwidth(&sample, cfg.folds, &cfg.cv_grid, k)?;
        let sched = BandwidthSchedule::around(h, &cfg.multipliers, cfg.eta, cfg.n)?;
        let hs = sched.bandwidths();
        let w = self.weights.as_ref().expect("experiment 2 weights are fixed per run");

        let mut sq_errors: Vec<Vec<f64>> = vec![Vec::new(); cfg.estimators.len()];
        'grid: for x in mise_grid() {
            let truth = exp2_regression(x);
            let mut at_x = Vec::with_capacity(cfg.estimators.len());
            for name in &cfg.estimators {
                let fit = match name.as_str() {
                    "LC" => nw_estimate(&sample, x, h, k),
                    "CLC" => clc_estimate(&sample, x, &hs, k),
                    _ => match cfg.ace_variant {
                        AceVariant::R1 => ace_r1(&sample, x, &sched, w, k),
                        AceVariant::R2 => ace_r2(&sample, x, &sched, w, k, cfg.residual_mode),
                    },
                };
                match fit {
                    Ok(v) => at_x.push((v - truth).powi(2)),
                    // Excluded for every estimator.
                    Err(Error::EmptyWindow { .. }) => continue 'grid,
                    Err(e) => return Err(e),
                }
            }
            for (acc, e) in sq_errors.iter_mut().zip(at_x) {
                acc.push(e);
            }
        }
        if sq_errors[0].is_empty() {
            return Err(Error::AllWindowsEmpty);
        }
        Ok(Replication {
            values: sq_errors
                .iter()
                .map(|errs| vec![pairwise_sum(errs) / errs.len() as f64])
                .collect(),
            fallback: false,
        })
    }

    fn experiment3(&self, rng: &mut rng::RngStream) -> Result<Replication> {
        let cfg = self.cfg;
        let process = Exp3Process {
            theta: cfg.theta,
            a: cfg.a,
            x_mean: cfg.x_mean,
            innovation_sd: cfg.innovation_sd,
            burn_in: cfg.burn_in,
        };
        let sample = gen_experiment3(cfg.n, &process, rng)?;
        let c = cfg.effective_c();
        let bracket = default_bracket(&sample)?;
        let opts = BeleOptions {
            use_s: cfg.use_s(),
            method: cfg.fit_method,
        };
        let on_edge = |theta: f64| {
            let slack = 1e-6 * (bracket.1 - bracket.0);
            theta <= bracket.0 + slack || theta >= bracket.1 - slack
        };
        let edge_failure = |theta: f64| Error::NoConvergence {
            what: "likelihood maximization stopped on the bracket",
            iterations: 0,
            residual: f64::NAN,
            best: vec![theta],
        };
        let mut values = Vec::with_capacity(cfg.estimators.len());
        let mut fallback = false;
        for name in &cfg.estimators {
            let theta = if name == "BELE" {
                let tau = cv_tau(&sample, c, &cfg.tau_grid, &LinearScore, bracket, opts)?;
                let bm = block_moments(&sample, make_blocks(cfg.n, c, tau)?, &LinearScore)?;
                let theta = bele_fit(&bm, bracket, opts)?;
                if on_edge(theta) && !cfg.keep_failures {
                    return Err(edge_failure(theta));
                }
                theta
            } else {
                let w = self.weights.as_ref().expect("experiment 3 weights are fixed per run");
                let ace = ace_bel(&sample, c, &cfg.tau_grid, w, &LinearScore, bracket, opts)?;
                if let Some(&t) = ace.theta_hats.iter().find(|&&t| on_edge(t)) {
                    if !cfg.keep_failures {
                        return Err(edge_failure(t));
                    }
                }
                fallback |= ace.fallback;
                ace.theta_tilde
            };
            values.push(vec![theta]);
        }
        Ok(Replication { values, fallback })
    }
}
