use std::io::Write;
use std::path::Path;

use kanppo_core::envs::make_env;
use kanppo_core::numcore::Rng;
use kanppo_core::policy::ActorCritic;
use kanppo_core::ppo::{evaluate, EvalReport};

use crate::args::EvalArgs;
use crate::error::CliError;

/// Loads a checkpoint and runs `episodes` deterministic episodes, sampling
/// initial states from `Rng::new(seed)`.
pub fn evaluate_checkpoint(
    checkpoint: &Path,
    env_name: &str,
    episodes: usize,
    seed: u64,
) -> Result<EvalReport, CliError> {
    let text = std::fs::read_to_string(checkpoint)
        .map_err(|e| CliError::Config(format!("checkpoint {}: {e}", checkpoint.display())))?;
    let ac = ActorCritic::from_checkpoint(&text)
        .map_err(|e| CliError::Config(format!("checkpoint {}: {e}", checkpoint.display())))?;
    let mut env = make_env(env_name).map_err(|e| CliError::Config(format!("env: {e}")))?;
    let spec = env.spec();
    if spec.obs_dim != ac.obs_dim() || spec.act_dim != ac.act_dim() {
        return Err(CliError::Config(format!(
            "checkpoint expects obs {} / act {} but {} has obs {} / act {}",
            ac.obs_dim(),
            ac.act_dim(),
            spec.name,
            spec.obs_dim,
            spec.act_dim
        )));
    }
    if episodes == 0 {
        return Err(CliError::Config("episodes: must be at least 1".into()));
    }
    Ok(evaluate(&ac, env.as_mut(), episodes, &mut Rng::new(seed))?)
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let r = evaluate_checkpoint(&args.checkpoint, &args.env, args.episodes, args.seed)?;
    writeln!(
        out,
        "episodes {}\nmean {}\nstd {}\nmin {}\nmax {}",
        r.returns.len(),
        r.mean,
        r.std,
        r.min,
        r.max
    )
    .map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}
