mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;
use crate::error::{CliError, EXIT_USAGE};

/// Dynamical-decoupling schedule compiler and order verifier.
#[derive(Debug, Parser)]
#[command(name = "ddkit", version)]
struct Cli {
    /// JSON config file; every key optional, unknown keys rejected.
    #[arg(long, env = "DDKIT_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a pulse schedule to JSON.
    Sequence(SequenceArgs),
    /// Build or validate a mutually orthogonal operation set.
    Moos(MoosArgs),
    /// Sweep total time over random baths and fit the decoupling order.
    Scan(ScanArgs),
    /// Design shaped pulses or measure their error scaling.
    #[command(subcommand)]
    Pulse(PulseCommand),
    /// Run the acceptance criteria; exit code is the number of failures.
    Accept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Udd,
    #[value(name = "first_order")]
    FirstOrder,
    Sdd,
    Cdd,
    #[value(name = "cdd_nested")]
    CddNested,
    Nudd,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    /// Comma-separated orders, innermost level first.
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,
    /// MOOS construction (`qubit_full:1`, `mlevel_full:6`, ...) or a MOOS JSON file.
    #[arg(long, default_value = "qubit_full:1")]
    moos: String,
    /// Pulse label for single-operator UDD (default: first MOOS element).
    #[arg(long)]
    op: Option<String>,
    /// Permit odd orders on inner NUDD levels.
    #[arg(long)]
    allow_odd_inner: bool,
    /// Append the optional closing pulses of the first-order scheme.
    #[arg(long)]
    closing: bool,
    /// Follow the schedule with its time mirror.
    #[arg(long)]
    mirror: bool,
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Output file (default: JSON on stdout, summary on stderr).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MoosArgs {
    /// Construction spec or MOOS JSON file to validate.
    spec: String,
    /// Also report the dimension of the generated Lie algebra.
    #[arg(long)]
    closure: bool,
    /// Closure dimension cap (default: dim² − 1).
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Load a schedule JSON instead of compiling one.
    #[arg(long = "schedule", conflicts_with = "scheme")]
    schedule_file: Option<PathBuf>,
    /// Random model `structure:SYSxBATH`, e.g. `general:2x4`.
    #[arg(long, default_value = "general:2x4")]
    model: String,
    /// Number of seeds, 0..N (overrides the config list).
    #[arg(long)]
    seeds: Option<u64>,
    /// Operators to track (default: every MOOS element).
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Sample CSV.
    #[arg(long)]
    out: PathBuf,
    /// Fit JSON (default: next to the CSV with a `.fits.json` suffix).
    #[arg(long)]
    fits: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum PulseCommand {
    /// Solve for an envelope with vanishing first-order error.
    Design(PulseDesignArgs),
    /// Measure the finite-pulse error against pulse duration.
    Scan(PulseScanArgs),
}

#[derive(Debug, Args)]
pub struct PulseDesignArgs {
    /// `rect`, `sym<n>` or `asym<n>`.
    #[arg(long, default_value = "sym3")]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    tau_p: f64,
    /// Seed for restart points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PulseScanArgs {
    #[arg(long)]
    pulse: PathBuf,
    #[arg(long, default_value = "general:2x4")]
    model: String,
    #[arg(long, default_value = "qubit_full:1")]
    moos: String,
    /// Pulse operator label (default: first MOOS element).
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    fits: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Precondition(e.to_string()))?;
    }
    match cli.command {
        Command::Sequence(args) => commands::sequence(&args),
        Command::Moos(args) => commands::moos(&args),
        Command::Scan(args) => commands::scan(&args, &config),
        Command::Pulse(PulseCommand::Design(args)) => commands::pulse_design(&args),
        Command::Pulse(PulseCommand::Scan(args)) => commands::pulse_scan(&args, &config),
        Command::Accept => commands::accept(&config),
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                0
            }
        }
    };
    std::process::exit(code);
}
