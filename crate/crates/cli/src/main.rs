use std::process::ExitCode;

use clap::Parser;
use vsl_cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(&Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("vsl: {e:#}");
            ExitCode::from(1)
        }
    }
}
