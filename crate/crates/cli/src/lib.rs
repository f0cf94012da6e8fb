//! Command-line driver: experiment configs, multi-seed training, CSV logs,
//! parameter audits, evaluation and timing.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod records;

use std::io::Write;

pub use args::{Cli, Command};
pub use config::ExperimentConfig;
pub use error::CliError;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Train(a) => commands::cmd_train(a, out),
        Command::Params(a) => commands::cmd_params(a, out),
        Command::Eval(a) => commands::cmd_eval(a, out),
        Command::Bench(a) => commands::cmd_bench(a, out),
        Command::StubEnv { args } => {
            let opts = kanppo_core::envs::StubOptions::from_args(args.iter().cloned())
                .map_err(CliError::Config)?;
            let stdin = std::io::stdin();
            match kanppo_core::envs::serve_stub(&opts, stdin.lock(), out) {
                0 => Ok(()),
                code => Err(CliError::Runtime(format!("stub exited with status {code}"))),
            }
        }
    }
}
