//! `wirefield` — command-line front end for the wire-field simulation
//! library.
//!
//! Every subcommand reads a JSON config (or plain flags for `triplet`),
//! writes its artifacts into `--out-dir`, and echoes a manifest JSON on
//! stdout. Exit codes: 0 success, 2 validation error (bad flags,
//! malformed or missing config), 3 numerical or I/O failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use wirefield_core::Sign;

/// Simulate charged-particle motion near an oscillating current-carrying
/// wire: fields, trajectories, periodic orbits, and their stability.
#[derive(Debug, Parser)]
#[command(name = "wirefield", version, disable_help_subcommand = true)]
struct Cli {
    /// Directory where artifacts are written (created if absent).
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the oscillating potential, its first partials, and the
    /// wave-equation residual on a (t, r) grid.
    PotentialTable(ConfigArg),
    /// Tabulate the axial electric and azimuthal magnetic fields on a
    /// (t, r) grid.
    Fields(ConfigArg),
    /// Integrate one trajectory of the cylindrical system and tabulate
    /// the first integrals along it.
    Simulate(ConfigArg),
    /// Classify a circular-orbit parameter triplet: frequency,
    /// admissibility, resonance, strong non-resonance.
    Triplet(TripletArgs),
    /// Continue the circular orbit in the forcing amplitude.
    #[command(name = "continue")]
    Continue(ConfigArg),
    /// Certify the twist conditions along a continued branch and report
    /// the certified amplitude threshold.
    TwistCheck(ConfigArg),
    /// Search for a (p, q) subharmonic orbit around a continued orbit.
    Subharmonics(ConfigArg),
    /// Probe a continued orbit with an ensemble of perturbed initial
    /// conditions.
    Stability(ConfigArg),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct TripletArgs {
    /// Orbit radius.
    #[arg(long)]
    rbar: f64,
    /// Mean current.
    #[arg(long = "I0")]
    i0: f64,
    /// Forcing period.
    #[arg(long = "T")]
    period: f64,
    /// Angular momentum; give together with --p-z for a full triplet.
    #[arg(long, requires = "p_z")]
    l: Option<f64>,
    /// Axial momentum offset; give together with --l.
    #[arg(long, requires = "l")]
    p_z: Option<f64>,
    /// Angular-momentum sign used when completing from (rbar, I0).
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    branch: BranchArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Sign {
    fn from(b: BranchArg) -> Sign {
        match b {
            BranchArg::Plus => Sign::Plus,
            BranchArg::Minus => Sign::Minus,
        }
    }
}

/// CLI failure carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or config — exit 2.
    Validation(String),
    /// Numerical failure or I/O failure past validation — exit 3.
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<wirefield_core::Error> for CliError {
    fn from(e: wirefield_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Shared run state handed to every command handler.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub threads: usize,
    started: Instant,
}

impl RunContext {
    pub fn wall_time_s(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}

/// Honor `WIREFIELD_THREADS` before any parallel work starts. Returns
/// the effective thread count.
fn configure_threads() -> Result<usize, CliError> {
    match std::env::var("WIREFIELD_THREADS") {
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                CliError::Validation(format!(
                    "WIREFIELD_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
            if n == 0 {
                return Err(CliError::Validation(
                    "WIREFIELD_THREADS must be at least 1".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Numerical(format!("cannot configure thread pool: {e}")))?;
            Ok(n)
        }
        Err(std::env::VarError::NotPresent) => Ok(rayon::current_num_threads()),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Validation(
            "WIREFIELD_THREADS must be valid unicode".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = configure_threads()?;
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| {
        CliError::Numerical(format!(
            "cannot create output directory {}: {e}",
            cli.out_dir.display()
        ))
    })?;
    let ctx = RunContext {
        out_dir: cli.out_dir,
        threads,
        started: Instant::now(),
    };
    match cli.command {
        Command::PotentialTable(a) => commands::potential_table(&ctx, &a.config),
        Command::Fields(a) => commands::fields(&ctx, &a.config),
        Command::Simulate(a) => commands::simulate(&ctx, &a.config),
        Command::Triplet(a) => commands::triplet(&ctx, &a),
        Command::Continue(a) => commands::continue_branch(&ctx, &a.config),
        Command::TwistCheck(a) => commands::twist_check(&ctx, &a.config),
        Command::Subharmonics(a) => commands::subharmonics(&ctx, &a.config),
        Command::Stability(a) => commands::stability(&ctx, &a.config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
