//! `soliton-jj`: sweeps, single runs and figure bundles for the two-soliton
//! Josephson junction. Exit codes: 0 success, 1 bad input or failed
//! validation, 2 numerical or I/O failure.

mod commands;
mod config;
mod figures;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::CommonArgs;
use figures::FigureId;

#[derive(Debug, Parser)]
#[command(name = "soliton-jj", version, about = "Two-soliton Josephson junction: functionals, dynamics, steady states, metrology")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate I, J and their z-derivatives.
    Functionals {
        /// Comma-separated z values (default: the z grid).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Option<Vec<f64>>,
        /// Use the Δ grid instead of the single --delta.
        #[arg(long)]
        sweep_delta: bool,
    },
    /// Compare the polynomial fits with quadrature on the 41×31 grid.
    ValidateApprox {
        #[arg(long, default_value_t = 0.05)]
        tol_rel: f64,
        /// Extra random (z, Δ) points drawn from --seed.
        #[arg(long, default_value_t = 0)]
        random_points: usize,
    },
    /// Steady states on the zero, π and |z| = 1 branches.
    SteadyStates {
        /// Sweep the Δ grid instead of the single --delta.
        #[arg(long)]
        sweep: bool,
    },
    /// Zero-phase root count versus Δ and the critical separation.
    Bifurcation,
    /// Integrate one trajectory.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        z0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta0: f64,
    },
    /// Classified trajectories over a (z0, Θ0) grid.
    PhasePortrait,
    /// N00N and cat-state estimators.
    Metrology {
        #[command(subcommand)]
        kind: MetrologyKind,
    },
    /// Regenerate the artifacts of one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: FigureId,
    },
}

#[derive(Debug, Subcommand)]
enum MetrologyKind {
    /// N00N interference and frequency sensitivity.
    Noon,
    /// Cat pair from the zero-phase roots at (Δ, ωr).
    Cat {
        /// Instead of using --delta, bisect Δ in [delta-min, delta-max] for this c2.
        #[arg(long)]
        locate_c2: Option<f64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Domain(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<soliton_jj::Error> for CliError {
    fn from(e: soliton_jj::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    soliton_jj::dynamics::self_test().map_err(|e| CliError::Numerical(format!("startup self-test: {e}")))?;
    let c = &cli.common;
    match cli.command {
        Command::Functionals { z, sweep_delta } => commands::functionals(c, z, sweep_delta),
        Command::ValidateApprox { tol_rel, random_points } => commands::validate_approx(c, tol_rel, random_points),
        Command::SteadyStates { sweep } => commands::steady_states(c, sweep),
        Command::Bifurcation => commands::bifurcation(c),
        Command::Simulate { z0, theta0 } => commands::simulate(c, z0, theta0),
        Command::PhasePortrait => commands::phase_portrait(c),
        Command::Metrology { kind } => match kind {
            MetrologyKind::Noon => commands::metrology_noon(c),
            MetrologyKind::Cat { locate_c2 } => commands::metrology_cat(c, locate_c2),
        },
        Command::Reproduce { figure } => figures::reproduce(c, figure),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
