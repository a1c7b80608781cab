//! Command-line front end: experiment runs and one-off combiner and weight
//! computations.

pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::combiner::{combine_known_scale, combine_unknown_scale, optimal_tilde_weights, regenerated_weights, InitialEstimateSet, WeightVector};
use crate::error::Error;
use crate::kernel::{kernel_weight_vectors, KernelSpec};
use crate::numerics::Matrix;
use crate::quantile::{a0_matrix, optimal_qr_weights, zou_yuan_weights, ErrorDensity};
use crate::simulation::{run_monte_carlo, ExperimentConfig, MonteCarloReport, FAILURE_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "acr", version, about = "Composite estimators and their Monte Carlo experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linear quantile regression with exponential errors.
    Exp1(Exp1Args),
    /// Kernel regression of sin(2πx).
    Exp2(Exp2Args),
    /// Blockwise empirical likelihood under AR(1) errors.
    Exp3(Exp3Args),
    /// Combine initial estimates given on the command line.
    Combine(CombineArgs),
    /// Variance-optimal weights for quantile or kernel composites.
    Weights(WeightsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Equal,
    Optimal,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file: a flat object, or a sidecar with a "config" key.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub weights: Option<WeightArg>,
    /// CSV output; the JSON sidecar goes next to it. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Any config key as KEY=JSON, e.g. multipliers=[0.6,1,1.4].
    #[arg(long = "set", value_name = "KEY=JSON")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Exp1Args {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct Exp2Args {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct Exp3Args {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub method: Option<u8>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long = "x-mean", allow_hyphen_values = true)]
    pub x_mean: Option<f64>,
    #[arg(long = "window-exponent")]
    pub window_exponent: Option<f64>,
    #[arg(long = "keep-failures")]
    pub keep_failures: Option<bool>,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub xi: Vec<f64>,
    /// Levels; 1..m when absent.
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Weights summing to one; equal when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Vec<f64>,
    /// Known scale φ; estimated when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsKind {
    /// Quantile levels with unit exponential errors.
    Quantile,
    Kernel,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long, value_enum)]
    pub kind: WeightsKind,
    #[arg(long, value_delimiter = ',', required = true)]
    pub taus: Vec<f64>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kernel: KernelArg,
    /// Covariance matrix in row-major order; overrides --kind.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Epanechnikov,
    Gaussian,
}

/// A failure carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }

    fn runtime(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: msg.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::DimensionMismatch(_) => Failure::config(e.to_string()),
            _ => Failure::runtime(e.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Exp1(a) => run_experiment(1, &a.run, Map::new()),
        Command::Exp2(a) => run_experiment(2, &a.run, Map::new()),
        Command::Exp3(a) => {
            let mut extra = Map::new();
            if let Some(m) = a.method {
                extra.insert("method".into(), json!(m));
            }
            if let Some(v) = a.a {
                extra.insert("a".into(), json!(v));
            }
            if let Some(v) = a.x_mean {
                extra.insert("x_mean".into(), json!(v));
            }
            if let Some(v) = a.window_exponent {
                extra.insert("window_exponent".into(), json!(v));
            }
            if let Some(v) = a.keep_failures {
                extra.insert("keep_failures".into(), json!(v));
            }
            run_experiment(3, &a.run, extra)
        }
        Command::Combine(a) => combine(&a),
        Command::Weights(a) => weights(&a),
    }
}

/// Reads a config file: a flat object or a sidecar holding one under "config".
pub fn read_config(path: &Path) -> Result<Map<String, Value>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut m) if m.get("config").is_some_and(Value::is_object) => m.remove("config").unwrap(),
        v => v,
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(Failure::config(format!("{}: expected a JSON object", path.display()))),
    }
}

/// Resolved configs, one per sample size, and the overlay they came from.
pub fn build_configs(
    experiment: u8,
    run: &RunArgs,
    extra: Map<String, Value>,
) -> Result<(Vec<ExperimentConfig>, Map<String, Value>), Failure> {
    let mut overlay = match &run.config {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    if let Some(e) = overlay.get("experiment") {
        if e.as_u64() != Some(experiment as u64) {
            return Err(Failure::config(format!("config is for experiment {e}, not {experiment}")));
        }
    }
    overlay.insert("experiment".into(), json!(experiment));
    overlay.extend(extra);
    if !run.n.is_empty() {
        overlay.insert("n".into(), json!(run.n));
    }
    if let Some(r) = run.reps {
        overlay.insert("replications".into(), json!(r));
    }
    if let Some(s) = run.seed {
        overlay.insert("master_seed".into(), json!(s));
    }
    if let Some(w) = run.weights {
        let name = match w {
            WeightArg::Equal => "equal",
            WeightArg::Optimal => "optimal",
        };
        overlay.insert("weights".into(), json!(name));
    }
    for kv in &run.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("--set expects KEY=JSON, got {kv}")))?;
        let v: Value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        overlay.insert(k.to_string(), v);
    }

    let sizes: Vec<Value> = match overlay.get("n") {
        Some(Value::Array(list)) if list.is_empty() => return Err(Failure::config("empty list of sample sizes")),
        Some(Value::Array(list)) => list.clone(),
        Some(v) => vec![v.clone()],
        None => vec![json!(ExperimentConfig::defaults(experiment, 1)?.n)],
    };
    let configs = sizes
        .into_iter()
        .map(|n| {
            let mut single = overlay.clone();
            single.insert("n".into(), n);
            ExperimentConfig::from_overlay(&single).map_err(|e| Failure::config(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((configs, overlay))
}

/// The resolved configuration of a run, with sample sizes as a list.
pub fn sidecar_config(configs: &[ExperimentConfig]) -> Value {
    let mut v = serde_json::to_value(&configs[0]).expect("config serializes");
    v["n"] = json!(configs.iter().map(|c| c.n).collect::<Vec<_>>());
    v
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn run_experiment(experiment: u8, run: &RunArgs, extra: Map<String, Value>) -> Result<(), Failure> {
    let (configs, _) = build_configs(experiment, run, extra)?;
    let mut reports: Vec<MonteCarloReport> = Vec::with_capacity(configs.len());
    let mut runtime_failure = None;
    for cfg in &configs {
        match run_monte_carlo(cfg) {
            Ok(r) => {
                eprintln!(
                    "experiment {} n = {}: {} of {} replications completed in {:.1}s",
                    r.experiment, r.n, r.completed, r.replications, r.wall_time_secs
                );
                if r.failure_rate() >= FAILURE_THRESHOLD {
                    runtime_failure.get_or_insert(format!(
                        "n = {}: {} of {} replications failed {:?}",
                        r.n, r.failures, r.replications, r.failure_kinds
                    ));
                }
                reports.push(r);
            }
            Err(Error::AllReplicationsFailed(k)) => {
                runtime_failure.get_or_insert(format!("n = {}: all {k} replications failed", cfg.n));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if !reports.is_empty() {
        let table = output::csv(&reports);
        match &run.out {
            Some(path) => {
                std::fs::write(path, &table).map_err(|e| Failure::io(path, e))?;
                let side = json!({
                    "config": sidecar_config(&configs),
                    "reports": reports,
                });
                let side_path = sidecar_path(path);
                let text = serde_json::to_string_pretty(&side).expect("report serializes");
                std::fs::write(&side_path, text + "\n").map_err(|e| Failure::io(&side_path, e))?;
            }
            None => print!("{table}"),
        }
    }
    match runtime_failure {
        Some(msg) => Err(Failure::runtime(msg)),
        None => Ok(()),
    }
}

fn combine(a: &CombineArgs) -> Result<(), Failure> {
    let m = a.theta.len();
    let taus = if a.taus.is_empty() {
        (1..=m).map(|k| k as f64).collect()
    } else {
        a.taus.clone()
    };
    let est = InitialEstimateSet::new(taus, a.theta.clone(), a.xi.clone())?;
    let w = if a.weights.is_empty() {
        WeightVector::equal(m)
    } else {
        WeightVector::new(a.weights.clone())?
    };
    let result = match a.phi {
        Some(phi) => combine_known_scale(&est, &w, phi)?,
        None => combine_unknown_scale(&est, &w)?,
    };
    let tilde = match a.phi {
        Some(_) => None,
        None => Some(regenerated_weights(&w, &a.xi)?.into_inner()),
    };
    let out = json!({
        "theta_tilde": result.theta_tilde,
        "phi_hat": result.phi_hat,
        "regenerated_weights": tilde,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    Ok(())
}

fn weights(a: &WeightsArgs) -> Result<(), Failure> {
    let out = if !a.sigma.is_empty() {
        let m = a.taus.len();
        let sigma = Matrix::from_row_major(m, m, a.sigma.clone())?;
        let w = optimal_tilde_weights(&sigma)?;
        json!({ "weights": w, "variance_factor": sigma.quadratic_form(w.as_slice()) })
    } else {
        match a.kind {
            WeightsKind::Quantile => {
                // Unit exponential: f(Q(τ)) = 1 - τ.
                let fe = ErrorDensity::exponential();
                let fq: Vec<f64> = a.taus.iter().map(|&t| fe.eval(-(1.0 - t).ln())).collect();
                let a0 = a0_matrix(&a.taus, &fq)?;
                let w = optimal_qr_weights(&a0)?;
                let zy = zou_yuan_weights(&fq)?;
                json!({
                    "weights": w,
                    "variance_factor": a0.quadratic_form(w.as_slice()),
                    "density_weights": zy,
                    "density_weights_variance_factor": a0.quadratic_form(zy.as_slice()),
                })
            }
            WeightsKind::Kernel => {
                let k = match a.kernel {
                    KernelArg::Epanechnikov => KernelSpec::epanechnikov(),
                    KernelArg::Gaussian => KernelSpec::gaussian(),
                };
                let kw = kernel_weight_vectors(&a.taus, &k)?;
                json!({
                    "w1_star": kw.w1_star,
                    "factor1": kw.factor1,
                    "w2_star": kw.w2_star,
                    "factor2": kw.factor2,
                })
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    Ok(())
}
