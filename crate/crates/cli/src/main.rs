use std::process::ExitCode;

use clap::Parser;

use anglewalk_cli::{execute, Cli, USAGE_EXIT};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stderr = std::io::stderr().lock();
    match execute(cli, &mut stderr) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(USAGE_EXIT)
        }
    }
}
