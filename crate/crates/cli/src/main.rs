mod commands;
mod model;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdeq::regions::OptimizerConfig;

/// Environment variable that fixes the number of worker threads.
pub const WORKERS_ENV: &str = "RDEQ_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(String),
    Infeasible(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Model(m) | CliError::Infeasible(m) => m,
        }
    }
}

impl From<rdeq::regions::RegionError> for CliError {
    fn from(e: rdeq::regions::RegionError) -> Self {
        match e {
            rdeq::regions::RegionError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<rdeq::sim::SimError> for CliError {
    fn from(e: rdeq::sim::SimError) -> Self {
        match e {
            rdeq::sim::SimError::EnumerationBound { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<rdeq::info::InfoError> for CliError {
    fn from(e: rdeq::info::InfoError) -> Self {
        CliError::Model(e.to_string())
    }
}

/// Bounds on the rate-distortion-equivocation region of secure lossy
/// source-channel coding with side information.
#[derive(Debug, Parser)]
#[command(name = "rdeq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Best equivocation of one bound at one (k, D) point.
    Region(RegionArgs),
    /// Tabulate a bound (or the side-information regime boundaries) over a grid, as CSV.
    Sweep(SweepArgs),
    /// Regime of BEC(beta) against BSC(eps) side information.
    Classify(ClassifyArgs),
    /// Test degradedness or less-noisiness between two channels.
    Order(OrderArgs),
    /// Monte Carlo simulation of a coding scheme.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Separated scheme vs uncoded transmission on the binary counterexample.
    ReproCounterexample(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// `bec-bsc` or a path to a TOML model file.
    #[arg(long, default_value = model::BUILTIN)]
    pub model: String,
    /// Erasure probability of Bob's side information (builtin model).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Crossover probability of Eve's side information (builtin model).
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Crossover probability of Eve's channel (builtin model).
    #[arg(long, default_value_t = 0.1)]
    pub zeta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 400)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,
    /// Points per axis of the closed-form grid search.
    #[arg(long, default_value_t = 1000)]
    pub grid_resolution: usize,
    #[arg(long)]
    pub u_card: Option<usize>,
    #[arg(long)]
    pub v_card: Option<usize>,
    #[arg(long)]
    pub q_card: Option<usize>,
    #[arg(long)]
    pub t_card: Option<usize>,
}

impl OptimizerArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            u_card: self.u_card,
            v_card: self.v_card,
            q_card: self.q_card,
            t_card: self.t_card,
            restarts: self.restarts,
            grid_resolution: self.grid_resolution,
            max_iterations: self.max_iterations,
            seed: self.seed,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bound {
    Inner,
    Outer,
    Prop1,
    Prop2,
    Prop3,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub bound: Bound,
    /// Channel uses per source symbol.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Distortion target.
    #[arg(long = "D", default_value_t = 0.0)]
    pub d: f64,
    /// Evaluate the bound at constant auxiliaries instead of optimizing.
    #[arg(long)]
    pub eval_constant: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepBound {
    Inner,
    Outer,
    Prop1,
    Prop2,
    Prop3,
    /// Regime boundaries in beta, swept over eps.
    Classify,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub bound: SweepBound,
    /// `name=start:stop:count` with name one of beta, eps, zeta, k, D; at most two.
    #[arg(long, required = true)]
    pub axis: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long = "D", default_value_t = 0.0)]
    pub d: f64,
    /// CSV destination.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relation {
    /// Is the second channel a degraded version of the first?
    Degraded,
    /// Is the first channel less noisy than the second?
    LessNoisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pair {
    /// Bob's against Eve's side information, p(b|a) vs p(e|a).
    Source,
    /// Bob's against Eve's channel output, p(y|x) vs p(z|x).
    Channel,
}

#[derive(Debug, Clone, Args)]
pub struct OrderArgs {
    #[arg(long, value_enum)]
    pub relation: Relation,
    /// First channel, `bsc:p` or `bec:p`.
    #[arg(long, requires = "second", conflicts_with = "pair")]
    pub first: Option<String>,
    #[arg(long, requires = "first")]
    pub second: Option<String>,
    /// Take both channels from a model instead.
    #[arg(long, value_enum, required_unless_present = "first")]
    pub pair: Option<Pair>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid points for the less-noisy concavity test.
    #[arg(long, default_value_t = rdeq::orderings::DEFAULT_LESS_NOISY_GRID)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Source block length.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub zeta: f64,
    /// Run trials on the calling thread only.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Source sent uncoded over the channel.
    Uncoded(SimArgs),
    /// Lossless random binning over a public noiseless link.
    Binning {
        #[command(flatten)]
        sim: SimArgs,
        /// Binning rate in bits per source symbol.
        #[arg(long)]
        rate: f64,
    },
    /// Two-layer scheme: binning, bit recombination and a coset channel code.
    Separation {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long)]
        rc: f64,
        #[arg(long)]
        rp: f64,
        #[arg(long, default_value_t = 0.0)]
        rf: f64,
        /// Channel uses per source symbol.
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    let record = match cli.command {
        Command::Region(args) => commands::region(&args)?,
        Command::Sweep(args) => commands::sweep(&args)?,
        Command::Classify(args) => commands::classify(&args)?,
        Command::Order(args) => commands::order(&args)?,
        Command::Sim(cmd) => commands::sim(&cmd)?,
        Command::ReproCounterexample(args) => commands::repro(&args)?,
    };
    println!("{}", output::render(&record));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("rdeq: {}", line.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rdeq: {}", e.message().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}
