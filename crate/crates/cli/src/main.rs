use std::process::ExitCode;

use chaofdm_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(&cli, &argv) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("manifest: {}", outcome.manifest.display());
            ExitCode::from(chaofdm_cli::EXIT_OK)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
