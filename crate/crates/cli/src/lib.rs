//! Command-line pipeline around the `chaofdm` library: encrypt, transmit
//! over the simulated OFDM link, decrypt, and emit CSV data for analysis.
//!
//! Every command writes its files plus a `manifest.json` into `--out-dir`.

pub mod args;
mod commands;
pub mod error;
pub mod manifest;

pub use args::{Cli, Command};
pub use commands::Outcome;
pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK};

pub fn run(cli: &Cli, argv: &[String]) -> CliResult<Outcome> {
    match &cli.command {
        Command::Encrypt(a) => commands::encrypt(a, argv),
        Command::Decrypt(a) => commands::decrypt(a, argv),
        Command::Transmit(a) => commands::transmit(a, argv),
        Command::BerSweep(a) => commands::ber_sweep(a, argv),
        Command::Analyze(a) => commands::analyze(a, argv),
        Command::Dynamics(a) => commands::dynamics(a, argv),
    }
}
