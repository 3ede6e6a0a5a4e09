//! `obsrenorm` — command-line front end for the observable-state engine.
//!
//! Every subcommand emits a deterministic JSON run report (schema version 1)
//! on stdout; `--format text` renders the same report as plain text, which
//! is the default for `divscan`. Exit codes: 0 success, 2 config error,
//! 3 domain error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use obsrenorm::decoherence::DecoherenceError;
use obsrenorm::divcalc::CountingError;
use obsrenorm::extensions::{ExtensionsError, Phi6Mode};
use obsrenorm::laurent::LedgerError;
use obsrenorm::osm::OsmError;
use obsrenorm::phi4::{Phi4Error, SubtractionMode};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl From<LedgerError> for CliError {
    fn from(e: LedgerError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<OsmError> for CliError {
    fn from(e: OsmError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<DecoherenceError> for CliError {
    fn from(e: DecoherenceError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<CountingError> for CliError {
    fn from(e: CountingError) -> Self {
        match e {
            CountingError::InteractionPowerTooSmall(_) => CliError::Config(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<Phi4Error> for CliError {
    fn from(e: Phi4Error) -> Self {
        match e {
            Phi4Error::InvalidConfig { .. }
            | Phi4Error::InvalidProfile { .. }
            | Phi4Error::TableSymbol { .. }
            | Phi4Error::TableOrderZero { .. }
            | Phi4Error::PoleBoundViolation { .. }
            | Phi4Error::MissingTableEntry { .. } => CliError::Config(e.to_string()),
            Phi4Error::ResummationOutsideDomain { .. } | Phi4Error::Ledger(_) => {
                CliError::Domain(e.to_string())
            }
        }
    }
}

impl From<ExtensionsError> for CliError {
    fn from(e: ExtensionsError) -> Self {
        match e {
            ExtensionsError::InvalidParameter { .. } => CliError::Config(e.to_string()),
            ExtensionsError::LogBranchViolation { .. } => CliError::Domain(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(
    name = "obsrenorm",
    about = "Observable-state renormalization: formal divergence ledgers, projection, and regularized pipelines",
    version
)]
struct Cli {
    /// Output format (divscan defaults to text, everything else to json).
    #[arg(long, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Loop and divergence-slot scan over the vertex count.
    Divscan {
        /// Interaction power l of φ^l.
        #[arg(long, default_value_t = 4)]
        l: u32,
        /// Number of external points.
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Largest vertex count to tabulate.
        #[arg(long, default_value_t = 6)]
        p_max: u32,
    },
    /// Project a state fixture and report formal vs projected ledgers.
    Project {
        /// JSON state fixture (state + observable).
        #[arg(long)]
        state: PathBuf,
    },
    /// Compare projection against the counterterm transformation.
    Compare {
        /// Optional JSON state fixture; otherwise a seeded random suite.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Largest state order in the random suite.
        #[arg(long, default_value_t = 8)]
        max_order: u32,
        /// Number of random states.
        #[arg(long, default_value_t = 100)]
        count: u32,
    },
    /// φ⁴ two-point pipelines.
    #[command(subcommand)]
    Phi4(Phi4Command),
    /// QED electron self-energy.
    #[command(subcommand)]
    Qed(QedCommand),
    /// First-order φ⁶ structure.
    #[command(subcommand)]
    Phi6(Phi6Command),
    /// Decoherence reference demos.
    #[command(subcommand)]
    Deco(DecoCommand),
}

#[derive(Subcommand, Debug)]
enum Phi4Command {
    /// Mass shift m² = m₀² + M²(0) from the built-in first-order table.
    MassShift(MassShiftArgs),
    /// Assembled two-point structure from a config file.
    TwoPoint {
        /// TOML config with [theory], optional [source] and [[beta]].
        #[arg(long)]
        config: PathBuf,
        /// Probe momentum squared for the resummed propagator.
        #[arg(long)]
        q2: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct MassShiftArgs {
    #[arg(long)]
    m0: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 1)]
    order: u32,
    #[arg(long, value_enum, default_value_t = CliSubtraction::Projected)]
    mode: CliSubtraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliSubtraction {
    Projected,
    Formal,
}

impl From<CliSubtraction> for SubtractionMode {
    fn from(m: CliSubtraction) -> Self {
        match m {
            CliSubtraction::Projected => SubtractionMode::Projected,
            CliSubtraction::Formal => SubtractionMode::Formal,
        }
    }
}

#[derive(Subcommand, Debug)]
enum QedCommand {
    /// Diagonal/non-diagonal spinor weights of the electron self-energy.
    SelfEnergy {
        /// Momentum squared (needs p² ≥ −m²).
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        e2: f64,
    },
}

#[derive(Subcommand, Debug)]
enum Phi6Command {
    FirstOrder {
        #[arg(long, value_enum, default_value_t = CliPhi6Mode::PoleConstants)]
        mode: CliPhi6Mode,
        #[arg(long, default_value_t = 1.0)]
        m0: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliPhi6Mode {
    PoleConstants,
    FullSquare,
}

impl From<CliPhi6Mode> for Phi6Mode {
    fn from(m: CliPhi6Mode) -> Self {
        match m {
            CliPhi6Mode::PoleConstants => Phi6Mode::PoleConstants,
            CliPhi6Mode::FullSquare => Phi6Mode::FullSquare,
        }
    }
}

#[derive(Subcommand, Debug)]
enum DecoCommand {
    /// Discrete mean-value identity plus a grid projection demo.
    Demo {
        #[arg(long, default_value_t = 4)]
        dim_system: usize,
        #[arg(long, default_value_t = 4)]
        dim_env: usize,
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn run(cli: &Cli) -> Result<(report::RunReport, Format), CliError> {
    let default_format = match cli.command {
        Command::Divscan { .. } => Format::Text,
        _ => Format::Json,
    };
    let format = cli.format.unwrap_or(default_format);
    let report = match &cli.command {
        Command::Divscan { l, n, p_max } => commands::divscan(*l, *n, *p_max)?,
        Command::Project { state } => commands::project(state)?,
        Command::Compare {
            state,
            seed,
            max_order,
            count,
        } => commands::compare(state.as_deref(), *seed, *max_order, *count)?,
        Command::Phi4(Phi4Command::MassShift(args)) => commands::phi4_mass_shift(
            args.m0,
            args.lambda,
            args.mu,
            args.order,
            args.mode.into(),
        )?,
        Command::Phi4(Phi4Command::TwoPoint { config, q2 }) => {
            commands::phi4_two_point(config, *q2)?
        }
        Command::Qed(QedCommand::SelfEnergy { p2, m, mu, e2 }) => {
            commands::qed_self_energy(*p2, *m, *mu, *e2)?
        }
        Command::Phi6(Phi6Command::FirstOrder {
            mode,
            m0,
            lambda,
            mu,
        }) => commands::phi6_first_order((*mode).into(), *m0, *lambda, *mu)?,
        Command::Deco(DecoCommand::Demo {
            dim_system,
            dim_env,
            grid_points,
            seed,
        }) => commands::deco_demo(*dim_system, *dim_env, *grid_points, *seed)?,
    };
    Ok((report, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, format)) => {
            match format {
                Format::Json => println!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
