//! Command-line front end: transform, diff, repair, mutate and experiment.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mtrepair::evolve::SdMode;

use error::{CliError, Outcome};
use manifest::{Manifest, Overrides};

#[derive(Parser)]
#[command(name = "mtrepair", version, about = "Search-based repair of model transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run manifest (`key = value` lines).
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// off, crowding or objective.
    #[arg(long = "sd-mode")]
    sd_mode: Option<SdMode>,
    #[arg(long = "max-gens")]
    max_gens: Option<usize>,
    /// Population size (parents plus offspring).
    #[arg(long)]
    pop: Option<usize>,
}

impl RunArgs {
    fn manifest(&self) -> Result<Manifest, CliError> {
        let overrides =
            Overrides { seed: self.seed, sd_mode: self.sd_mode, max_generations: self.max_gens, population: self.pop };
        Manifest::load(&self.manifest, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the transformation on every test input and write the outputs.
    Transform(RunArgs),
    /// Compare two models and print the differences as JSON.
    Diff { expected: PathBuf, actual: PathBuf, metamodel: PathBuf },
    /// Search for a patch that makes every test pass.
    Repair(RunArgs),
    /// Write faulty variants of a correct program.
    Mutate(RunArgs),
    /// Repair every mutant under each configuration and seed.
    Experiment(RunArgs),
}

/// Runs the command line and returns the process exit status.
pub fn run<I: IntoIterator<Item = T>, T: Into<OsString> + Clone>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Transform(a) => a.manifest().and_then(|m| commands::transform(&m)),
        Command::Diff { expected, actual, metamodel } => commands::diff(expected, actual, metamodel),
        Command::Repair(a) => a.manifest().and_then(|m| commands::repair_cmd(&m)),
        Command::Mutate(a) => a.manifest().and_then(|m| commands::mutate(&m)),
        Command::Experiment(a) => a.manifest().and_then(|m| experiment::experiment(&m)),
    };
    match result {
        Ok(Outcome::Positive) => 0,
        Ok(Outcome::Negative) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
