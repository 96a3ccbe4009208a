use std::process::ExitCode;

use biblio_cli::Cli;
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match biblio_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("biblio: {msg}");
            ExitCode::FAILURE
        }
    }
}
