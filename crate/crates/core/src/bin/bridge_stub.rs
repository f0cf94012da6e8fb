//! Reference child process for the environment bridge; see
//! `kanppo_core::envs::serve_stub` for its behavior and flags.

use std::io;
use std::process::ExitCode;

use kanppo_core::envs::{serve_stub, StubOptions};

fn main() -> ExitCode {
    match StubOptions::from_args(std::env::args().skip(1)) {
        Ok(opts) => ExitCode::from(serve_stub(&opts, io::stdin().lock(), io::stdout().lock())),
        Err(e) => {
            eprintln!("bridge_stub: {e}");
            ExitCode::from(2)
        }
    }
}
