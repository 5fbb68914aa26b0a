//! `infogeo`: command-line access to divergences, Legendre duality, Fisher
//! information, Chernoff information, information projections, w-mixture
//! clustering and Fisher-Rao distances.
//!
//! Every invocation prints one JSON document on stdout carrying `version`,
//! `command` and `seed`. Exit code 0 is success, 1 a usage error (nothing
//! on stdout) and 2 a numerical failure.

mod commands;
mod error;
mod output;
mod spec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::error::CliError;

const MODEL_HELP: &str = "Model specs are JSON objects, inline or in a file:
  {\"family\": \"bernoulli\", \"theta\": [0.4]}
  {\"family\": \"categorical\", \"categories\": 3, \"source\": [0.2, 0.3, 0.5]}
  {\"family\": \"gaussian_fixed_var\", \"sigma\": 2, \"theta\": [1]}
  {\"family\": \"mixture\", \"components\": [{\"kind\": \"gaussian\", \"mu\": 0, \"sigma\": 1},
      {\"kind\": \"laplace\", \"mu\": 2, \"b\": 1}, {\"kind\": \"cauchy\", \"x0\": 0, \"gamma\": 1}], \"theta\": [0.3, 0.3]}
Families: bernoulli, categorical, poisson, gaussian, gaussian_fixed_var, exponential, mixture.
\"theta\" holds natural parameters (mixture weights of all but the first component);
\"source\" gives the usual parameters of an exponential family instead.
Parameter flags take natural parameters, comma-separated or as a JSON array.

Exit codes: 0 success, 1 usage error, 2 numerical failure.";

#[derive(Debug, Parser)]
#[command(
    name = "infogeo",
    version,
    about = "Information-geometric computations on exponential and mixture families",
    after_help = MODEL_HELP
)]
struct Cli {
    /// Write the subcommand's tabular data to this CSV file.
    #[arg(long, global = true, value_name = "PATH")]
    emit_csv: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Divergence(commands::DivergenceArgs),
    Legendre(commands::LegendreArgs),
    Fim(commands::FimArgs),
    Chernoff(commands::ChernoffArgs),
    Project(commands::ProjectArgs),
    Cluster(commands::ClusterArgs),
    Rao(commands::RaoArgs),
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Divergence(a) => commands::divergence(a, seed),
        Command::Legendre(a) => commands::legendre(a, seed),
        Command::Fim(a) => commands::fim(a, seed),
        Command::Chernoff(a) => commands::chernoff(a, seed),
        Command::Project(a) => commands::project(a, seed),
        Command::Cluster(a) => commands::cluster(a, seed),
        Command::Rao(a) => commands::rao(a, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|out| {
        if let Some(path) = &cli.emit_csv {
            out.table.write(path)?;
        }
        Ok(output::render(&out.doc.into_value()))
    });
    match result {
        Ok(json) => {
            let mut stdout = std::io::stdout().lock();
            if writeln!(stdout, "{json}").is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
