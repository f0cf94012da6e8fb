use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "kanppo", version, about = "Train and compare KAN and MLP actor-critics with PPO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one policy per seed and write logs, checkpoints and a merged curve.
    Train(TrainArgs),
    /// Count actor and critic parameters.
    Params(ParamsArgs),
    /// Score a checkpoint with deterministic actions.
    Eval(EvalArgs),
    /// Time actor forward passes for MLP(64,64) and KAN.
    Bench(BenchArgs),
    /// Deterministic bridge child for protocol tests.
    #[command(hide = true)]
    StubEnv {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Experiment config (JSON).
    #[arg(long, required_unless_present = "dump_default_config")]
    pub config: Option<PathBuf>,
    /// Print the default config and exit.
    #[arg(long)]
    pub dump_default_config: bool,
    /// Seeds run concurrently as separate processes.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Run only this seed and skip merging (used by worker processes).
    #[arg(long, hide = true)]
    pub only_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    /// Architecture name, or `all`.
    #[arg(long, default_value = "all")]
    pub arch: String,
    /// Task name (built-in or one of the six MuJoCo benchmarks).
    #[arg(long, conflicts_with_all = ["dims", "all_envs"])]
    pub env: Option<String>,
    /// Observation and action sizes, `IN,OUT`.
    #[arg(long, conflicts_with = "all_envs")]
    pub dims: Option<String>,
    /// Spline order.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Spline grid intervals.
    #[arg(long, default_value_t = 3)]
    pub g: usize,
    /// Report every MuJoCo benchmark and the cross-task average.
    #[arg(long)]
    pub all_envs: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub env: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    /// Seed for initial-state sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Observation and action sizes, `IN,OUT`.
    #[arg(long, default_value = "17,6")]
    pub dims: String,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub g: usize,
    /// Time forward plus backward passes instead of forward only.
    #[arg(long)]
    pub backward: bool,
    /// Also write the CSV here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `IN,OUT`.
pub fn parse_dims(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(',')?;
    let a = a.trim().parse().ok()?;
    let b = b.trim().parse().ok()?;
    (a > 0 && b > 0).then_some((a, b))
}
