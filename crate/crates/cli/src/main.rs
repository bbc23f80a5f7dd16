mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;
use truss_core::TrussError;

#[derive(Parser, Debug)]
#[command(name = "truss", version, about = "Natural frequencies, modes and stress waves of elastic trusses")]
struct Cli {
    /// Worker threads for frequency sweeps (default: all cores).
    #[arg(long, global = true, env = "TRUSS_THREADS")]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    /// Lower end of the frequency window in rad/s (default: 0.05/τ_min).
    #[arg(long)]
    omega_min: Option<f64>,
    /// Upper end of the frequency window in rad/s (default: 1.2π/τ_min).
    #[arg(long)]
    omega_max: Option<f64>,
    /// Grid points for the determinant sweep (default: 2000 per unit of ωτ_min).
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Laplacian,
    Reverberation,
    FemConsistent,
    FemLumped,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Natural frequencies in a window.
    Freqs {
        file: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, value_enum, default_value_t = Method::Laplacian)]
        method: Method,
        /// Rod subdivisions for the FEM methods.
        #[arg(long, default_value_t = 1)]
        divisions: usize,
        /// Keep only the lowest COUNT frequencies (counting multiplicity).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Mode shapes and anchor forces at a natural frequency.
    Modes {
        file: PathBuf,
        /// Natural frequency in rad/s (as printed by `freqs`).
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
    },
    /// Laplacian and FEM frequencies against rod subdivision, long format.
    Compare {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
        divisions: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Wall time of the four methods against rod subdivision.
    Bench {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
        divisions: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Step stress-wave propagation.
    Simulate {
        file: PathBuf,
        /// ROD:FROM_JOINT:STRESS[:START_TIME]; repeatable. Stress is positive in tension.
        #[arg(long, allow_hyphen_values = true)]
        impulse: Vec<String>,
        #[arg(long)]
        t_max: f64,
        /// Snapshot times (comma separated, each ≤ t-max).
        #[arg(long, value_delimiter = ',')]
        snapshot: Vec<f64>,
        /// Where to write the snapshot CSV (required with --snapshot in CSV mode).
        #[arg(long)]
        snapshot_file: Option<PathBuf>,
        /// Fronts weaker than this (in stress units) are not launched.
        #[arg(long, default_value_t = 0.0)]
        min_amplitude: f64,
        /// Abort when more fronts than this are in flight.
        #[arg(long, default_value_t = 1_000_000)]
        max_fronts: usize,
    },
    /// Check a structure against closed forms and generic invariants.
    Verify {
        file: Option<PathBuf>,
        /// Built-in structure (square or bridge); enables its closed-form checks.
        #[arg(long, conflicts_with = "file")]
        builtin: Option<String>,
    },
    /// Print a built-in structure file.
    Example { name: String },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
    /// Report is still printed; exit code as for numerical failures.
    ChecksFailed { report: String, failed: usize },
}

impl From<TrussError> for CliError {
    fn from(e: TrussError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn run(cli: Cli) -> CliResult<String> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure threads: {e}")))?;
    }
    let format = cli.format;
    match cli.command {
        Command::Freqs {
            file,
            window,
            method,
            divisions,
            count,
        } => commands::freqs(&commands::load(&file)?, &window, method, divisions, count, format),
        Command::Modes { file, omega } => commands::modes(&commands::load(&file)?, omega, format),
        Command::Compare {
            file,
            divisions,
            count,
            window,
        } => commands::compare(&commands::load(&file)?, &divisions, count, &window, format),
        Command::Bench {
            file,
            divisions,
            count,
            window,
        } => commands::bench(&commands::load(&file)?, &divisions, count, &window, format),
        Command::Simulate {
            file,
            impulse,
            t_max,
            snapshot,
            snapshot_file,
            min_amplitude,
            max_fronts,
        } => commands::simulate(
            &commands::load(&file)?,
            &impulse,
            t_max,
            &snapshot,
            snapshot_file.as_deref(),
            min_amplitude,
            max_fronts,
            format,
        ),
        Command::Verify { file, builtin } => verify::run(file.as_deref(), builtin.as_deref(), format),
        Command::Example { name } => commands::example(&name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::ChecksFailed { report, failed }) => {
            print!("{report}");
            eprintln!("error: {failed} check(s) failed");
            ExitCode::from(3)
        }
    }
}
