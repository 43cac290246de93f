//! `jstego`: embed, extract and measure robust JPEG steganography.

mod args;
mod commands;
mod exit;
mod grid;
mod input;
mod report;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jstego: {e}");
            ExitCode::from(e.code())
        }
    }
}
