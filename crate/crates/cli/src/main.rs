use std::process::ExitCode;

use clap::Parser;

use bregman_bound_cli::{configure_threads, execute, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = configure_threads()
        .and_then(|()| RunConfig::from_cli(&cli))
        .and_then(|config| execute(&config));
    match status {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
