use std::process::ExitCode;

use boostkit_cli::{execute, Cli, CliError};
use clap::Parser;

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let text = execute(&cli.command)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::File { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boostkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
