use std::process::ExitCode;

use clap::Parser;
use torus_spectra::cli::{self, Cli};
use torus_spectra::sweeps::configure_threads;

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(cli) => cli,
        // help and version exit 0, usage errors exit 2
        Err(e) => e.exit(),
    };
    configure_threads();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match cli::run(&parsed, argv) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
