//! The `ableak` command line: `compute`, `sweep` and `verify`.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing property, 2 for
//! unreadable input or invalid parameters, 3 when an optimizer run stopped
//! short of its tolerance (the value is still printed).

mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::channel::{Channel, DEFAULT_ROW_TOLERANCE};
use crate::error::{LeakageError, Result};
use crate::measures::{self, MeasureResult};
use crate::optim::OptimizerConfig;
use crate::order::{LeakageValue, Order, OrderPair, TauParameter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECKS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Default gap tolerance for the optimizer and the Blahut–Arimoto bracket.
const DEFAULT_OPTIMIZER_TOLERANCE: f64 = 1e-9;
const DEFAULT_CAPACITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "ableak", version, about = "Maximal alpha,beta-leakage of finite channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one measure for a channel.
    Compute(ComputeArgs),
    /// Evaluate maximal alpha,beta-leakage over a grid of orders and write CSV.
    Sweep(SweepArgs),
    /// Check the leakage invariants on a channel or on seeded random channels.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measure {
    /// Maximal alpha,beta-leakage (--alpha, --beta).
    Abl,
    /// Maximal leakage.
    Maxl,
    /// Maximal alpha-leakage (--alpha).
    MaxAlphaL,
    /// Local differential privacy.
    Ldp,
    /// Local Renyi differential privacy (--alpha).
    Lrdp,
    /// The alpha = inf variant of LRDP (--beta).
    LrdpVariant,
    /// The (alpha, tau) reparameterization (--alpha, --tau).
    AlphaTau,
    /// Shannon capacity.
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    fn convert(self, value: LeakageValue) -> f64 {
        match self {
            Unit::Nats => value.nats(),
            Unit::Bits => value.bits(),
        }
    }

    fn column(self) -> &'static str {
        match self {
            Unit::Nats => "value_nats",
            Unit::Bits => "value_bits",
        }
    }
}

#[derive(Debug, clap::Args)]
struct ComputeArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, value_enum)]
    measure: Measure,
    #[arg(long, value_name = "R|inf")]
    alpha: Option<Order>,
    #[arg(long, value_name = "R|inf")]
    beta: Option<Order>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = Unit::Nats)]
    unit: Unit,
    /// Also print the maximizer and optimizer diagnostics.
    #[arg(long)]
    report: bool,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct SweepArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    alpha: Vec<Order>,
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "tau", required_unless_present = "tau")]
    beta: Vec<Order>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    tau: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Unit::Nats)]
    unit: Unit,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "random")]
    channel: Option<PathBuf>,
    /// Number of seeded random channels to check.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Slack allowed on every inequality and equality.
    #[arg(long, default_value_t = verify::DEFAULT_SLACK)]
    tolerance: f64,
    /// Let random channels contain structural zeros.
    #[arg(long)]
    allow_zeros: bool,
}

/// Runs the command line on `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Compute(args) => compute(&args, out, err),
        Command::Sweep(args) => sweep(&args, err),
        Command::Verify(args) => verify::run(&args, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Fixed twelve decimals; infinite values print as `inf`.
pub fn format_value(value: f64) -> String {
    if value.is_infinite() {
        "inf".to_string()
    } else {
        format!("{value:.12}")
    }
}

fn load_channel(path: &PathBuf) -> Result<Channel> {
    Channel::read_csv(path, DEFAULT_ROW_TOLERANCE)
}

fn require<T>(value: Option<T>, flag: &str, measure: &str) -> Result<T> {
    value.ok_or_else(|| LeakageError::InvalidParameter(format!("--measure {measure} needs --{flag}")))
}

fn require_finite(order: Order, flag: &str) -> Result<f64> {
    order
        .finite()
        .ok_or_else(|| LeakageError::InvalidOrder(format!("--{flag} must be finite for this measure")))
}

fn optimizer_config(tolerance: Option<f64>) -> Result<OptimizerConfig> {
    let config = OptimizerConfig { tolerance: tolerance.unwrap_or(DEFAULT_OPTIMIZER_TOLERANCE), ..OptimizerConfig::default() };
    config.validate()?;
    Ok(config)
}

/// The pairwise closed forms go through the general entry point so that
/// `--report` can name the maximizing pair.
fn evaluate(channel: &Channel, args: &ComputeArgs) -> Result<MeasureResult> {
    let config = optimizer_config(args.tolerance)?;
    let abl = |alpha: Order, beta: Order| measures::maximal_alpha_beta_leakage(channel, OrderPair::new(alpha, beta)?, &config);
    match args.measure {
        Measure::Abl => abl(require(args.alpha, "alpha", "abl")?, require(args.beta, "beta", "abl")?),
        Measure::Maxl => abl(Order::Infinite, Order::Finite(1.0)),
        Measure::MaxAlphaL => measures::maximal_alpha_leakage(channel, require(args.alpha, "alpha", "max-alpha-l")?, &config),
        Measure::Ldp => abl(Order::Infinite, Order::Infinite),
        Measure::Lrdp => {
            let alpha = require_finite(require(args.alpha, "alpha", "lrdp")?, "alpha")?;
            abl(Order::Finite(alpha), Order::Finite(alpha))
        }
        Measure::LrdpVariant => {
            let beta = require_finite(require(args.beta, "beta", "lrdp-variant")?, "beta")?;
            abl(Order::Infinite, Order::Finite(beta))
        }
        Measure::AlphaTau => {
            let alpha = require_finite(require(args.alpha, "alpha", "alpha-tau")?, "alpha")?;
            let tau = TauParameter::new(require(args.tau, "tau", "alpha-tau")?)?;
            measures::alpha_tau_leakage(channel, alpha, tau, &config)
        }
        Measure::Capacity => Ok(MeasureResult {
            value: measures::shannon_capacity(channel, args.tolerance.unwrap_or(DEFAULT_CAPACITY_TOLERANCE))?,
            maximizing_x_prime: 0,
            maximizing_distribution: None,
            report: None,
            converged: true,
        }),
    }
}

fn compute(args: &ComputeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let channel = load_channel(&args.channel)?;
    let result = evaluate(&channel, args)?;
    writeln!(out, "{}", format_value(args.unit.convert(result.value)))?;
    if args.report {
        // Maximal leakage and capacity have no outer maximum over x'.
        let has_x_prime = !matches!(args.measure, Measure::Maxl | Measure::Capacity)
            && !(args.measure == Measure::MaxAlphaL && args.alpha == Some(Order::Infinite));
        write_report(&channel, &result, has_x_prime, out)?;
    }
    if !result.converged {
        writeln!(err, "warning: optimizer stopped before reaching the gap tolerance; the value is a lower bound")?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn write_report(channel: &Channel, result: &MeasureResult, has_x_prime: bool, out: &mut dyn Write) -> Result<()> {
    if has_x_prime {
        let x = result.maximizing_x_prime;
        let label = channel.input_labels().map_or_else(|| x.to_string(), |l| l[x].clone());
        writeln!(out, "maximizing_x_prime: {label}")?;
    }
    if let Some(p) = &result.maximizing_distribution {
        let weights: Vec<String> = p.weights().iter().map(|w| format!("{w:.12}")).collect();
        writeln!(out, "p_tilde: {}", weights.join(","))?;
    }
    if let Some(report) = &result.report {
        writeln!(out, "iterations: {}", report.iterations)?;
        writeln!(out, "certified_gap: {:.3e}", report.certified_gap)?;
    }
    writeln!(out, "converged: {}", result.converged)?;
    Ok(())
}

enum SweepPoint {
    Beta(Order, Order),
    Tau(f64, TauParameter),
}

fn sweep(args: &SweepArgs, err: &mut dyn Write) -> Result<i32> {
    let channel = load_channel(&args.channel)?;
    let config = optimizer_config(args.tolerance)?;
    let mut points = Vec::new();
    for &alpha in &args.alpha {
        if args.tau.is_empty() {
            for &beta in &args.beta {
                OrderPair::new(alpha, beta)?;
                points.push(SweepPoint::Beta(alpha, beta));
            }
        } else {
            let a = require_finite(alpha, "alpha")?;
            for &tau in &args.tau {
                points.push(SweepPoint::Tau(a, TauParameter::new(tau)?));
            }
        }
    }

    // Open the output first so an unwritable path fails before any work.
    let second = if args.tau.is_empty() { "beta" } else { "tau" };
    let mut writer = csv::Writer::from_path(&args.out).map_err(csv_error)?;
    writer.write_record(["alpha", second, args.unit.column()]).map_err(csv_error)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| LeakageError::InvalidParameter(format!("cannot start {:?} workers: {e}", args.jobs)))?;
    let results: Vec<Result<MeasureResult>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| match *p {
                SweepPoint::Beta(a, b) => measures::maximal_alpha_beta_leakage(&channel, OrderPair::new(a, b)?, &config),
                SweepPoint::Tau(a, t) => measures::alpha_tau_leakage(&channel, a, t, &config),
            })
            .collect()
    });

    let mut all_converged = true;
    for (point, result) in points.iter().zip(results) {
        let result = result?;
        all_converged &= result.converged;
        let (first, second) = match point {
            SweepPoint::Beta(a, b) => (a.to_string(), b.to_string()),
            SweepPoint::Tau(a, t) => (a.to_string(), t.value().to_string()),
        };
        writer
            .write_record([first, second, format_value(args.unit.convert(result.value))])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    if !all_converged {
        writeln!(err, "warning: some grid points did not reach the gap tolerance; their values are lower bounds")?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn csv_error(e: csv::Error) -> LeakageError {
    LeakageError::Io(e.to_string())
}
