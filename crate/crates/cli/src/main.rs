#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;
mod sweep;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Common};
use commands::{load, Loaded};
use output::{emit, envelope, CliError};

fn run_with(
    name: &str,
    common: &Common,
    f: impl FnOnce(&Loaded) -> Result<Value, CliError>,
) -> Result<(), CliError> {
    let l = load(common)?;
    let mut report = envelope(name, common.seed, f(&l)?);
    report["instance"] = commands::instance_summary(&l.cfg);
    emit(&report, common.out.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Capacity(c) => run_with("capacity", &c, commands::capacity_cmd),
        Command::Rd(c) => run_with("rd", &c, commands::rd_cmd),
        Command::Dispersion(c) => run_with("dispersion", &c, commands::dispersion_cmd),
        Command::Symmetrizable(c) => run_with("symmetrizable", &c, |l| commands::symmetrizable_cmd(l, c.seed)),
        Command::ExactGame(a) => run_with("exact-game", &a.common, |l| commands::exact_game_cmd(l, &a)),
        Command::LpBound(a) => run_with("lp-bound", &a.common, |l| commands::lp_bound_cmd(l, &a)),
        Command::FbBound(a) => run_with("fb-bound", &a.common, |l| commands::fb_bound_cmd(l, &a)),
        Command::Simulate(a) => run_with("simulate", &a.common, |l| commands::simulate_cmd(l, &a)),
        Command::Sweep(a) => {
            // The CSV owns stdout when no --csv is given, so the summary is
            // written only on request.
            let l = load(&a.common)?;
            let mut report = envelope("sweep", a.common.seed, sweep::sweep_cmd(&l, &a)?);
            report["instance"] = commands::instance_summary(&l.cfg);
            match (&a.csv, &a.common.out) {
                (None, None) => Ok(()),
                (_, out) => emit(&report, out.as_deref()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let err = CliError::Usage(e.render().to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
