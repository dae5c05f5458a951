//! `swnet`: generate, evaluate and stress small-world torus networks.
//!
//! Exit status is 0 on success, 1 on usage or input errors and 2 when a run
//! finishes but flags a runtime condition (a cascade hitting its round cap,
//! an intact network that greedy routing cannot fully navigate).

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Flagged(msg)) => {
            eprintln!("swnet: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("swnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
