#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use priorint::known_variance::Method;

#[derive(Parser)]
#[command(name = "priorint", version, about = "Confidence intervals for a normal mean that use prior information that the mean is near zero")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand that builds a problem configuration.
#[derive(Args, Clone, Debug)]
pub struct ConfigArgs {
    /// Sample size.
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    /// One minus the confidence level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Weight on the uniform part of the length criterion.
    #[arg(long, default_value_t = 0.1)]
    pub w: f64,
    /// Half-width of the spline support.
    #[arg(long, default_value_t = 8.0)]
    pub q: f64,
    /// Spacing of the spline knots.
    #[arg(long, default_value_t = 1.0)]
    pub knot_step: f64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum MethodArg {
    Standard,
    Pratt,
    Mixed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Standard => Method::Standard,
            MethodArg::Pratt => Method::Pratt,
            MethodArg::Mixed => Method::Mixed,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Mode {
    Known,
    Unknown,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Interval for μ when σ is known.
    IntervalKnown {
        #[arg(long, allow_hyphen_values = true)]
        xbar: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_enum, default_value = "mixed")]
        method: MethodArg,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Optimize the spline b and write it as JSON.
    OptimizeB {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Interval for μ when σ is unknown, from summary statistics or a data file.
    IntervalUnknown {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "data")]
        xbar: Option<f64>,
        #[arg(long, required_unless_present = "data")]
        s: Option<f64>,
        /// Sample size; taken from the spline file when omitted.
        #[arg(long)]
        n: Option<usize>,
        /// Whitespace- or comma-separated observations.
        #[arg(long, conflicts_with_all = ["xbar", "s"])]
        data: Option<PathBuf>,
        #[arg(long)]
        spline: PathBuf,
    },
    /// Efficiency (and, for unknown variance, coverage) on a θ grid, as CSV.
    EfficiencyTable {
        #[arg(long, value_enum)]
        mode: Mode,
        #[command(flatten)]
        config: ConfigArgs,
        /// Spline for unknown mode; optimized from the configuration if absent.
        #[arg(long)]
        spline: Option<PathBuf>,
        #[arg(long, default_value_t = 12.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare quadrature coverage and expected length with Monte Carlo.
    VerifyMc {
        /// Unknown-variance spline; without it a known-variance rule is checked.
        #[arg(long)]
        spline: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mixed")]
        method: MethodArg,
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated θ values.
        #[arg(long, default_value = "0,1,2,5", value_delimiter = ',')]
        thetas: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Acceptance regions of the known-variance mixed family on a θ grid.
    AcceptanceFamily {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 15.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::IntervalKnown { xbar, sigma, method, config } => {
            commands::interval_known(xbar, sigma, method.into(), &config)
        }
        Command::OptimizeB { config, out } => commands::optimize_b(&config, &out),
        Command::IntervalUnknown { xbar, s, n, data, spline } => {
            commands::interval_unknown(xbar, s, n, data.as_deref(), &spline)
        }
        Command::EfficiencyTable { mode, config, spline, theta_max, step, out } => {
            commands::efficiency_table(mode, &config, spline.as_deref(), theta_max, step, &out)
        }
        Command::VerifyMc { spline, method, config, thetas, reps, seed, out } => {
            commands::verify_mc(
                spline.as_deref(),
                method.into(),
                &config,
                &thetas,
                reps,
                seed,
                out.as_deref(),
            )
        }
        Command::AcceptanceFamily { config, theta_max, step, format, out } => {
            commands::acceptance_family(&config, theta_max, step, format, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
