use std::io::Write;
use std::path::Path;
use std::process::{Child, Command};

use kanppo_core::envs::make_env;
use kanppo_core::numcore::Rng;
use kanppo_core::policy::ActorCritic;
use kanppo_core::ppo::train;

use crate::args::TrainArgs;
use crate::config::{ExperimentConfig, OUTPUT_ENV_VAR};
use crate::error::CliError;
use crate::records::{
    checkpoint_path, curve_csv_path, last_good_checkpoint_path, merge_curves, read_run_csv,
    run_csv_path, write_curve, RunLog,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub updates: usize,
    pub env_steps: usize,
    pub final_mean_return: f64,
}

fn write_checkpoint(path: &Path, ac: &ActorCritic) -> Result<(), CliError> {
    std::fs::write(path, ac.to_checkpoint()).map_err(|e| CliError::io(path, e))
}

/// Trains one seed, writing `seed_<s>.csv`, `seed_<s>_timing.csv` and
/// `seed_<s>.ckpt` into `dir`. On a numerical abort the last good policy is
/// saved as `seed_<s>_last_good.ckpt`.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedSummary, CliError> {
    let mut env = make_env(&cfg.env).map_err(|e| match e {
        kanppo_core::Error::UnknownEnv(_) => CliError::Config(format!("env: {e}")),
        other => CliError::Runtime(other.to_string()),
    })?;
    let (obs_dim, act_dim) = (env.spec().obs_dim, env.spec().act_dim);
    let mut rng = Rng::new(seed);
    let mut ac = ActorCritic::build(
        cfg.arch,
        obs_dim,
        act_dim,
        cfg.spline,
        cfg.ppo.normalize_obs,
        &mut rng.split("init"),
    )?;
    let mut log = RunLog::create(dir, seed)?;
    let mut log_err = None;
    let result = train(&mut ac, env.as_mut(), &cfg.ppo, seed, &mut rng, &mut |r, _| {
        if let Err(e) = log.append(r) {
            let msg = e.to_string();
            log_err = Some(e);
            return Err(kanppo_core::Error::InvalidArgument(msg));
        }
        Ok(())
    });
    log.finish()?;
    if let Some(e) = log_err {
        return Err(e);
    }
    match result {
        Ok(summary) => {
            write_checkpoint(&checkpoint_path(dir, seed), &ac)?;
            Ok(SeedSummary {
                seed,
                updates: summary.updates,
                env_steps: summary.env_steps,
                final_mean_return: summary.records.last().map_or(f64::NAN, |r| r.mean_return),
            })
        }
        Err(kanppo_core::Error::NonFinite(detail)) => {
            let path = last_good_checkpoint_path(dir, seed);
            write_checkpoint(&path, &ac)?;
            Err(CliError::Runtime(format!(
                "seed {seed}: non-finite values ({detail}); last good policy saved to {}",
                path.display()
            )))
        }
        Err(e) => Err(CliError::Runtime(format!("seed {seed}: {e}"))),
    }
}

fn spawn_worker(config: &Path, seed: u64, dir: &Path) -> Result<Child, CliError> {
    let exe = std::env::current_exe().map_err(|e| CliError::Runtime(format!("current_exe: {e}")))?;
    Command::new(exe)
        .args(["train", "--config"])
        .arg(config)
        .args(["--only-seed", &seed.to_string()])
        .env(OUTPUT_ENV_VAR, dir)
        .spawn()
        .map_err(|e| CliError::Runtime(format!("spawning worker for seed {seed}: {e}")))
}

fn run_parallel(config: &Path, seeds: &[u64], jobs: usize, dir: &Path) -> Result<(), CliError> {
    let mut failures = Vec::new();
    for batch in seeds.chunks(jobs) {
        let children = batch
            .iter()
            .map(|&s| spawn_worker(config, s, dir).map(|c| (s, c)))
            .collect::<Result<Vec<_>, _>>()?;
        for (seed, mut child) in children {
            let status = child
                .wait()
                .map_err(|e| CliError::Runtime(format!("waiting for seed {seed}: {e}")))?;
            if !status.success() {
                failures.push(format!("seed {seed} exited with {status}"));
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(failures.join("; ")))
    }
}

fn merge(dir: &Path, seeds: &[u64]) -> Result<(), CliError> {
    let runs = seeds
        .iter()
        .map(|&s| read_run_csv(&run_csv_path(dir, s)))
        .collect::<Result<Vec<_>, _>>()?;
    write_curve(&curve_csv_path(dir), &merge_curves(&runs))
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let say = |out: &mut dyn Write, s: String| {
        writeln!(out, "{s}").map_err(|e| CliError::Runtime(format!("stdout: {e}")))
    };
    if args.dump_default_config {
        return say(out, ExperimentConfig::default().to_json());
    }
    let config_path = args
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = ExperimentConfig::load(config_path)?;
    if args.jobs == 0 {
        return Err(CliError::Config("jobs: must be at least 1".into()));
    }
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    if let Some(seed) = args.only_seed {
        let s = run_seed(&cfg, seed, &dir)?;
        return say(out, format!("seed {}: {} updates, {} steps", s.seed, s.updates, s.env_steps));
    }

    let resolved = dir.join("config.json");
    std::fs::write(&resolved, cfg.to_json() + "\n").map_err(|e| CliError::io(&resolved, e))?;
    if args.jobs > 1 {
        run_parallel(config_path, &cfg.seeds, args.jobs, &dir)?;
    } else {
        for &seed in &cfg.seeds {
            let s = run_seed(&cfg, seed, &dir)?;
            say(
                out,
                format!(
                    "seed {}: {} updates, {} steps, final mean return {}",
                    s.seed, s.updates, s.env_steps, s.final_mean_return
                ),
            )?;
        }
    }
    merge(&dir, &cfg.seeds)?;
    say(out, format!("wrote {}", curve_csv_path(&dir).display()))
}
