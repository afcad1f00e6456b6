//! `frasian`: prediction regions, CDF bands and weighted multiple testing
//! from the command line. See `frasian --help`.

mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cfg = config::RunConfig::parse();
    match commands::run(&cfg) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("frasian: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
