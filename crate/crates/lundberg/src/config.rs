use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lundberg_core::bounds::CapPolicy;
use lundberg_core::embedding::Scheme;
use lundberg_core::montecarlo::DEFAULT_EPS;

use crate::output::Format;

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Parser)]
#[command(name = "lundberg", version, about = "Drawdown and minimum bounds for positive-drift random walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Distribution spec file (JSON).
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Sampling {
    /// Number of independent paths.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Adjustment coefficient, riskiness and Gaussian-matched rate.
    Alpha {
        #[command(flatten)]
        common: Common,
    },
    /// Excess constants d+, d-, d0.
    Excess {
        #[command(flatten)]
        common: Common,
        /// Restrict the suprema to |x| < cap.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Bounds on E[M_d] and on the tail of the all-time minimum.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Tail point for P(-min > x); repeatable.
        #[arg(long = "x")]
        xs: Vec<f64>,
        /// `d` (default), `none`, or a number.
        #[arg(long, default_value = "d")]
        cap: CapArg,
    },
    /// Monte Carlo estimates.
    Simulate {
        #[command(subcommand)]
        what: SimulateCommand,
    },
    /// Skorokhod embedding of a finite-support law.
    Embed {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SchemeArg::Day)]
        scheme: SchemeArg,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Everything end to end, with PASS/FAIL marks on each bound check.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long = "x")]
        xs: Vec<f64>,
        #[arg(long, default_value = "d")]
        cap: CapArg,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// E[M_d] over drawdown episodes.
    Max {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// P(-min S > x).
    Min {
        #[command(flatten)]
        common: Common,
        #[arg(long = "x")]
        xs: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// E[exp(-alpha S_n)] and E[exp(-alpha S_tau)].
    Martingale {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Fixed horizon for the unstopped check.
        #[arg(long, default_value_t = 10)]
        steps: u64,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapArg(pub CapPolicy);

impl FromStr for CapArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "d" => Ok(CapArg(CapPolicy::DrawdownLevel)),
            "none" => Ok(CapArg(CapPolicy::Unrestricted)),
            _ => s
                .parse::<f64>()
                .map(|c| CapArg(CapPolicy::Fixed(c)))
                .map_err(|_| format!("expected `d`, `none` or a number, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Dubins,
    Ay,
    AyMinus,
    Day,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Dubins => Scheme::Dubins,
            SchemeArg::Ay => Scheme::AzemaYor,
            SchemeArg::AyMinus => Scheme::AzemaYorMinus,
            SchemeArg::Day => Scheme::Day,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Alpha,
    Excess,
    Bounds,
    SimulateMax,
    SimulateMin,
    SimulateMartingale,
    Embed,
    Report,
}

/// Fully resolved invocation. Fields a command does not use keep their
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dist_path: PathBuf,
    pub d: f64,
    pub xs: Vec<f64>,
    pub n: u64,
    pub seed: u64,
    pub eps: f64,
    pub cap: CapPolicy,
    pub scheme: Scheme,
    pub steps: u64,
    pub format: Format,
}

pub const DEFAULT_SIMULATION_PATHS: u64 = 100_000;
pub const DEFAULT_REPORT_PATHS: u64 = 20_000;
pub const DEFAULT_REPORT_XS: [f64; 3] = [0.5, 1.0, 2.0];

impl RunConfig {
    pub fn new(command: Command, dist_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            dist_path: dist_path.into(),
            d: 1.0,
            xs: Vec::new(),
            n: DEFAULT_SIMULATION_PATHS,
            seed: DEFAULT_SEED,
            eps: DEFAULT_EPS,
            cap: CapPolicy::DrawdownLevel,
            scheme: Scheme::Day,
            steps: 10,
            format: Format::Csv,
        }
    }

    fn with_common(command: Command, common: Common) -> Self {
        RunConfig { format: common.format, ..RunConfig::new(command, common.dist) }
    }

    fn with_sampling(mut self, s: Sampling, default_n: u64) -> Self {
        self.n = s.n.unwrap_or(default_n);
        self.seed = s.seed;
        self
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        match cli.command {
            CliCommand::Alpha { common } => RunConfig::with_common(Command::Alpha, common),
            CliCommand::Excess { common, cap } => RunConfig {
                cap: cap.map_or(CapPolicy::Unrestricted, CapPolicy::Fixed),
                ..RunConfig::with_common(Command::Excess, common)
            },
            CliCommand::Bounds { common, d, xs, cap } => {
                RunConfig { d, xs, cap: cap.0, ..RunConfig::with_common(Command::Bounds, common) }
            }
            CliCommand::Simulate { what } => match what {
                SimulateCommand::Max { common, d, sampling } => RunConfig { d, ..RunConfig::with_common(Command::SimulateMax, common) }
                    .with_sampling(sampling, DEFAULT_SIMULATION_PATHS),
                SimulateCommand::Min { common, xs, eps, sampling } => {
                    RunConfig { xs, eps, ..RunConfig::with_common(Command::SimulateMin, common) }
                        .with_sampling(sampling, DEFAULT_SIMULATION_PATHS)
                }
                SimulateCommand::Martingale { common, d, steps, sampling } => {
                    RunConfig { d, steps, ..RunConfig::with_common(Command::SimulateMartingale, common) }
                        .with_sampling(sampling, DEFAULT_SIMULATION_PATHS)
                }
            },
            CliCommand::Embed { common, scheme, sampling } => {
                RunConfig { scheme: scheme.into(), ..RunConfig::with_common(Command::Embed, common) }
                    .with_sampling(sampling, DEFAULT_SIMULATION_PATHS)
            }
            CliCommand::Report { common, d, xs, cap, eps, sampling } => {
                let xs = if xs.is_empty() { DEFAULT_REPORT_XS.to_vec() } else { xs };
                RunConfig { d, xs, cap: cap.0, eps, ..RunConfig::with_common(Command::Report, common) }
                    .with_sampling(sampling, DEFAULT_REPORT_PATHS)
            }
        }
    }
}
