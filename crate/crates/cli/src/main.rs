//! `qcloner` — train, test and inspect the linear-optical quantum cloner.
//!
//! Exit codes: 0 success (or converged), 1 usage or configuration error,
//! 2 training stopped on its evaluation budget.

mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;

#[derive(Debug, Parser)]
#[command(name = "qcloner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn beam-splitter settings with the simplex loop.
    Train(commands::TrainArgs),
    /// Tabulate the noise-free cost over a (phi, theta) grid.
    Scan(commands::ScanArgs),
    /// Evaluate fixed angles on a random test set.
    Test(commands::TestArgs),
    /// Permanent of a complex matrix read from CSV.
    Permanent(commands::PermanentArgs),
    /// Train once per seed, in parallel.
    Sweep(commands::SweepArgs),
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
    let result = match &cli.command {
        Command::Train(a) => commands::train_cmd(a),
        Command::Scan(a) => commands::scan_cmd(a),
        Command::Test(a) => commands::test_cmd(a),
        Command::Permanent(a) => commands::permanent_cmd(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
