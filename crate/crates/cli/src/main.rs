//! Command-line front end: scans, fits, THz referencing and comb budgets
//! driven by scenario files.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cpt", version, about = "Three-photon CPT simulator for trapped Ca+")]
struct Cli {
    /// Number of worker threads for the scan engine (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a fluorescence scan and write the spectrum (CSV + JSON sidecar).
    Scan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Detect and fit dark lines on a spectrum file.
    Fit {
        /// Spectrum CSV produced by `scan`.
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Detection threshold in units of the shot noise.
        #[arg(long, default_value_t = 5.0)]
        min_depth_sigma: f64,
    },
    /// THz reference report: per-line frequency combination, Zeeman shift,
    /// residual shift and comb uncertainty budget.
    Reference {
        /// Fit records JSON produced by `fit`.
        #[arg(long)]
        fits: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Force the line label when the report contains a single line.
        #[arg(long)]
        m_thz: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print the comb lock table and frequency uncertainty budget.
    CombBudget {
        #[arg(long)]
        scenario: PathBuf,
        /// Optional output file (JSON); stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict the dark-resonance detuning of the swept laser.
    DarkPredict {
        #[arg(long)]
        scenario: PathBuf,
        /// Restrict the prediction to one Zeeman line, e.g. "-13/5".
        #[arg(long)]
        m_thz: Option<String>,
    },
    /// Print the computed Zeeman line coupling table.
    Table1,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        commands::configure_threads(threads);
    }
    let result = match cli.command {
        Command::Scan { scenario, out, seed } => commands::run_scan(&scenario, &out, seed),
        Command::Fit { spectrum, out, min_depth_sigma } => {
            commands::run_fit(&spectrum, &out, min_depth_sigma)
        }
        Command::Reference { fits, scenario, out, m_thz, format } => {
            commands::run_reference(&fits, &scenario, &out, m_thz.as_deref(), format == Format::Json)
        }
        Command::CombBudget { scenario, out } => commands::run_comb_budget(&scenario, out.as_deref()),
        Command::DarkPredict { scenario, m_thz } => {
            commands::run_dark_predict(&scenario, m_thz.as_deref())
        }
        Command::Table1 => commands::run_table(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.exit_code)
        }
    }
}
