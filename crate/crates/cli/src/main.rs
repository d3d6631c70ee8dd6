//! `cflab`: reciprocal sums, continued fractions and their statistics.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use cflab_core::{ExpansionMode, MersenneCatalog, SequenceKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{PartialConfig, Preset, RunConfig, Statistic};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cflab", version, about = "Continued-fraction experiments on reciprocal sums of Mersenne numbers and related sequences")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exponent catalog replacing the embedded one.
    #[arg(long, global = true, env = "CFLAB_CATALOG")]
    catalog: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Decimal digits.
    #[arg(long, global = true, visible_alias = "digits")]
    precision: Option<u64>,
    /// Number of sequence terms.
    #[arg(long, global = true)]
    terms: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Keep every stride-th point of running statistics.
    #[arg(long, global = true)]
    stride: Option<u64>,
    /// Largest quotient binned individually in the Gauss-Kuzmin histogram.
    #[arg(long, global = true)]
    m_max: Option<u64>,
    /// Comma-separated statistics to compute.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    stats: Option<Vec<Statistic>>,
    /// Quotients between checkpoints.
    #[arg(long, global = true)]
    checkpoint_interval: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Certified,
    Paper,
}

impl From<ModeArg> for ExpansionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => ExpansionMode::Exact,
            ModeArg::Certified => ExpansionMode::Certified,
            ModeArg::Paper => ExpansionMode::Paper,
        }
    }
}

/// Optional positional sequence selection shared by several commands.
#[derive(Debug, Args, Clone, Default)]
pub struct SequenceArgs {
    /// mersenne, dyadic, fibonacci-power, factorial-power or custom:t1,t2,...
    #[arg(value_parser = parse_kind)]
    kind: Option<SequenceKind>,
    /// Number of terms (same as --terms).
    count: Option<usize>,
}

fn parse_kind(s: &str) -> Result<SequenceKind, String> {
    match s {
        "mersenne" => Ok(SequenceKind::Mersenne),
        "dyadic" => Ok(SequenceKind::Dyadic),
        "fibonacci-power" => Ok(SequenceKind::FibonacciPower),
        "factorial-power" => Ok(SequenceKind::FactorialPower),
        _ => match s.strip_prefix("custom:") {
            Some(list) => Ok(SequenceKind::Custom(
                list.split(',').map(|t| t.trim().to_string()).collect(),
            )),
            None => Err(format!(
                "unknown sequence `{s}` (expected mersenne, dyadic, fibonacci-power, factorial-power or custom:t1,t2,...)"
            )),
        },
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact reciprocal sum and its decimal expansion.
    Sum(SequenceArgs),
    /// Continued-fraction expansion, streamed to disk with checkpoints.
    Cf(commands::cf::CfArgs),
    /// Running statistics of a stored expansion.
    Stats(commands::stats::StatsArgs),
    /// Value and table of the number whose quotients are the sequence terms.
    Um(SequenceArgs),
    /// Growth, approximation-exponent and irrationality-measure diagnostics.
    Diagnostics(commands::diagnostics::DiagnosticsArgs),
    /// Continue an interrupted `cf` run.
    Resume {
        checkpoint: PathBuf,
    },
}

/// Resolved configuration and catalog for one invocation.
pub struct Context {
    pub config: RunConfig,
    pub catalog: MersenneCatalog,
}

impl Context {
    fn build(global: &GlobalArgs, seq: &SequenceArgs) -> Result<Self> {
        let file = match &global.config {
            Some(p) => PartialConfig::load(p)?,
            None => PartialConfig::default(),
        };
        let cli = PartialConfig {
            sequence: seq.kind.clone(),
            terms: seq.count.or(global.terms),
            precision: global.precision,
            mode: global.mode.map(Into::into),
            statistics: global.stats.clone(),
            stride: global.stride,
            m_max: global.m_max,
            out: global.out.clone(),
            checkpoint_interval: global.checkpoint_interval,
            preset: global.preset,
        };
        let config = RunConfig::resolve(file, cli);
        let catalog = match &global.catalog {
            Some(p) => MersenneCatalog::load(p).map_err(|e| CliError::Config(e.to_string()))?,
            None => MersenneCatalog::embedded(),
        };
        config.validate(&catalog)?;
        Ok(Self { config, catalog })
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Sum(seq) => commands::sum::run(&Context::build(&cli.global, seq)?),
        Command::Cf(args) => commands::cf::run(&Context::build(&cli.global, &args.sequence)?, args),
        Command::Stats(args) => commands::stats::run(&Context::build(&cli.global, &SequenceArgs::default())?, args),
        Command::Um(seq) => commands::um::run(&Context::build(&cli.global, seq)?),
        Command::Diagnostics(args) => {
            commands::diagnostics::run(&Context::build(&cli.global, &args.sequence)?, args)
        }
        Command::Resume { checkpoint } => commands::cf::resume(checkpoint),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error::exit_code(&e))
        }
    }
}
