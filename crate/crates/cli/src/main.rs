//! Scenario-driven command line for the blockaded-ensemble simulator.
//!
//! ```text
//! blockade run <scenario> [--out DIR] [--no-plot] [--tol REL]
//! blockade validate <scenario>
//! blockade list-scenarios
//! ```
//!
//! `<scenario>` is a JSON file path or the name of a shipped scenario.
//! Exit codes: 0 success, 2 validation error, 3 integration failure,
//! 4 unwritable output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blockade_cli::run;
use blockade_cli::scenario::{self, Scenario};

#[derive(Parser)]
#[command(
    name = "blockade",
    version,
    about = "Simulator for coherent control of Rydberg-blockaded atomic ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV/SVG artifacts.
    Run {
        /// Scenario file path, or the name of a shipped scenario.
        scenario: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Skip SVG plots.
        #[arg(long)]
        no_plot: bool,
        /// Override the integrator's relative tolerance (absolute tolerance
        /// scales as 1e-3 of it).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        /// Scenario file path, or the name of a shipped scenario.
        scenario: String,
    },
    /// List the shipped scenario library.
    ListScenarios,
}

fn load_scenario(name_or_path: &str) -> Result<Scenario, run::RunError> {
    let text = if let Some(embedded) = scenario::library_scenario(name_or_path) {
        embedded.to_string()
    } else {
        fs::read_to_string(name_or_path).map_err(|e| {
            run::RunError::Validation(format!("cannot read scenario `{name_or_path}`: {e}"))
        })?
    };
    Scenario::parse(&text).map_err(|e| run::RunError::Validation(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out,
            no_plot,
            tol,
        } => {
            let sc = match load_scenario(&scenario) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            match run::run_scenario(&sc, &out, !no_plot, tol) {
                Ok(paths) => {
                    for path in paths {
                        println!("{}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(sc) => {
                println!("ok: {}", sc.name);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::ListScenarios => {
            for (name, text) in scenario::LIBRARY {
                let description = Scenario::parse(text)
                    .ok()
                    .and_then(|sc| sc.description)
                    .unwrap_or_default();
                println!("{name:34} {description}");
            }
            ExitCode::SUCCESS
        }
    }
}
