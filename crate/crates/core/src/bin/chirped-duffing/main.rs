//! Experiment runner for the chirped-drive Duffing phase-locking study:
//! single solver runs, S-curve scans, threshold/width maps over P2, and
//! the bundled figure datasets.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration (exit 2).
    Config(String),
    /// A solver failed (exit 3).
    Solver(String),
    /// `figures --check` tolerance violation (exit 4).
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Check(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Check(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "chirped-duffing",
    version,
    about = "Capture probabilities, thresholds, and transition widths of a \
             chirped-frequency-driven Duffing oscillator (quantum ladder \
             climbing vs classical autoresonance)"
)]
struct Cli {
    /// Flat-key TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub(crate) config: Option<PathBuf>,
    /// Output directory (default: out/<command>).
    #[arg(long, global = true, value_name = "DIR")]
    pub(crate) out: Option<PathBuf>,
    /// Worker threads for sweeps (default: $CHIRPED_DUFFING_WORKERS, then
    /// all cores). Results are identical for any worker count.
    #[arg(long, global = true)]
    pub(crate) workers: Option<usize>,
    /// Recorded in the manifest; all solvers are deterministic and do not
    /// consume randomness.
    #[arg(long, global = true)]
    pub(crate) seed: Option<u64>,
    #[command(subcommand)]
    pub(crate) command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the level-amplitude ladder once and export populations.
    Ladder(LadderArgs),
    /// Capture probability vs P1 at fixed P2: S-curve, threshold, width.
    Scan(ScanArgs),
    /// Threshold P1cr over a P2 list with analytic reference lines.
    ThresholdMap(MapArgs),
    /// Transition width ΔP1 over a P2 list with reference levels.
    WidthMap(MapArgs),
    /// Evolve the Wigner function (fixed or rotating frame).
    Wigner(WignerArgs),
    /// Emit the dataset behind one of the five bundled figures.
    Figures(FiguresArgs),
}

#[derive(Args)]
pub struct LadderArgs {
    #[arg(long)]
    pub(crate) p1: Option<f64>,
    #[arg(long)]
    pub(crate) p2: Option<f64>,
    #[arg(long)]
    pub(crate) tau0: Option<f64>,
    #[arg(long)]
    pub(crate) tau_end: Option<f64>,
    /// Comma-separated snapshot times (default: tau-end only).
    #[arg(long)]
    pub(crate) snapshots: Option<String>,
    /// Basis truncation (default: sized from P1, P2, tau-end).
    #[arg(long)]
    pub(crate) basis_size: Option<usize>,
    #[arg(long)]
    pub(crate) rtol: Option<f64>,
    #[arg(long)]
    pub(crate) atol: Option<f64>,
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub(crate) p2: Option<f64>,
    #[arg(long)]
    pub(crate) p1_min: Option<f64>,
    #[arg(long)]
    pub(crate) p1_max: Option<f64>,
    #[arg(long)]
    pub(crate) points: Option<usize>,
    #[arg(long)]
    pub(crate) tau0: Option<f64>,
    /// Measurement time (default: max(12, 10·P2)).
    #[arg(long)]
    pub(crate) tau_measure: Option<f64>,
    /// Separator level override (default: per-run valley detection).
    #[arg(long)]
    pub(crate) n_c: Option<usize>,
    #[arg(long)]
    pub(crate) rtol: Option<f64>,
    #[arg(long)]
    pub(crate) atol: Option<f64>,
}

#[derive(Args)]
pub struct MapArgs {
    /// Comma-separated P2 list (default: 13 log-spaced points over
    /// [0.1, 10] plus the 0.2 and 8 reference rows).
    #[arg(long)]
    pub(crate) p2_list: Option<String>,
    /// P1 points per S-curve.
    #[arg(long)]
    pub(crate) points: Option<usize>,
    #[arg(long)]
    pub(crate) tau0: Option<f64>,
    #[arg(long)]
    pub(crate) rtol: Option<f64>,
    #[arg(long)]
    pub(crate) atol: Option<f64>,
}

#[derive(Args)]
pub struct WignerArgs {
    /// `fixed` or `rotating`.
    #[arg(long)]
    pub(crate) frame: Option<String>,
    // fixed frame
    #[arg(long)]
    pub(crate) alpha_bar: Option<f64>,
    #[arg(long)]
    pub(crate) beta_bar: Option<f64>,
    #[arg(long)]
    pub(crate) eps_bar: Option<f64>,
    #[arg(long)]
    pub(crate) gamma: Option<f64>,
    // rotating frame
    #[arg(long)]
    pub(crate) mu: Option<f64>,
    #[arg(long)]
    pub(crate) lambda: Option<f64>,
    #[arg(long)]
    pub(crate) sigma_sq: Option<f64>,
    // common
    #[arg(long)]
    pub(crate) tau0: Option<f64>,
    /// Comma-separated snapshot slow times.
    #[arg(long)]
    pub(crate) snapshots: Option<String>,
    #[arg(long)]
    pub(crate) half_width: Option<f64>,
    #[arg(long)]
    pub(crate) grid_points: Option<usize>,
    /// Fixed frame: split step in units of 1/ω0 (default 0.2). Rotating
    /// frame: forced step, rejected if above the stability bound
    /// (default: the bound itself).
    #[arg(long)]
    pub(crate) dt: Option<f64>,
    #[arg(long)]
    pub(crate) sponge_frac: Option<f64>,
}

#[derive(Args)]
pub struct FiguresArgs {
    /// Figure id, 1–5.
    #[arg(long)]
    pub(crate) fig: u32,
    /// Compare against the embedded golden expectations instead of
    /// emitting the full dataset; exit 4 on violation.
    #[arg(long)]
    pub(crate) check: bool,
    /// Figures 1–3: emit only energy-basis histograms, skipping the
    /// (slow) phase-space panels.
    #[arg(long)]
    pub(crate) skip_wigner: bool,
    #[arg(long)]
    pub(crate) points: Option<usize>,
}

fn worker_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("CHIRPED_DUFFING_WORKERS").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    .max(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = worker_count(cli.workers);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return ExitCode::from(3);
        }
    };

    let name = match &cli.command {
        Command::Ladder(_) => "ladder",
        Command::Scan(_) => "scan",
        Command::ThresholdMap(_) => "threshold-map",
        Command::WidthMap(_) => "width-map",
        Command::Wigner(_) => "wigner",
        Command::Figures(_) => "figures",
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));

    let result = pool.install(|| match &cli.command {
        Command::Ladder(args) => commands::ladder(&cli, args, &out, workers),
        Command::Scan(args) => commands::scan(&cli, args, &out, workers),
        Command::ThresholdMap(args) => commands::map(&cli, args, &out, workers, true),
        Command::WidthMap(args) => commands::map(&cli, args, &out, workers, false),
        Command::Wigner(args) => commands::wigner(&cli, args, &out, workers),
        Command::Figures(args) => commands::figures(&cli, args, &out, workers),
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
