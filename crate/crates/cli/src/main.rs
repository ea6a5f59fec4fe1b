mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::Failure;

const EXIT_INVALID: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = match f {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Invalid(_) => EXIT_INVALID,
                Failure::Compute(_) => EXIT_COMPUTE,
            };
            eprintln!("crystalwalk {}: {f}", cli.command.name());
            ExitCode::from(code)
        }
    }
}
