mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = match &cli.command {
        Command::Analyze(common) => commands::cmd_analyze(common)?,
        Command::Simulate(common) => commands::cmd_simulate(common)?,
        Command::Validate(common) => {
            let (out, err) = commands::cmd_validate(common)?;
            println!("max_abs_error = {err:.6}");
            out
        }
        Command::Sweep { common, from, to, step } => commands::cmd_sweep(common, *from, *to, *step)?,
    };
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
