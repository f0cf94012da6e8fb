use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::adam::{adam_step, clip_grad_norm, AdamState};
use super::buffer::{normalize_advantages, RolloutBuffer, Transition};
use super::loss::{ppo_loss, LossStats, TrainingBatch};
use super::PpoConfig;
use crate::envs::Env;
use crate::error::{Error, Result};
use crate::numcore::Rng;
use crate::policy::ActorCritic;

/// Completed episodes averaged into `mean_return`.
const RETURN_WINDOW: usize = 10;

/// One row of the training log, emitted after every update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Cumulative environment steps.
    pub steps: usize,
    /// 1-based update index.
    pub update: usize,
    /// Mean undiscounted return of the last completed episodes; NaN before
    /// the first one ends.
    pub mean_return: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    /// Milliseconds since training started. Not reproducible across runs.
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub updates: usize,
    pub env_steps: usize,
    pub optimizer_steps: usize,
    pub episodes: usize,
    pub records: Vec<RunRecord>,
}

struct Progress {
    env_steps: usize,
    optimizer_steps: usize,
    episodes: usize,
    obs: Vec<f64>,
    episode_return: f64,
    recent: VecDeque<f64>,
}

struct Streams {
    rollout: Rng,
    reset: Rng,
    shuffle: Rng,
}

/// Trains `ac` on `env` for `cfg.total_steps` environment steps.
///
/// `on_update` sees every record together with the current policy. If a
/// loss, gradient or network output turns non-finite, `ac` is restored to
/// its state at the start of the failing update and [`Error::NonFinite`] is
/// returned.
pub fn train<E: Env + ?Sized>(
    ac: &mut ActorCritic,
    env: &mut E,
    cfg: &PpoConfig,
    seed: u64,
    rng: &mut Rng,
    on_update: &mut dyn FnMut(&RunRecord, &ActorCritic) -> Result<()>,
) -> Result<TrainSummary> {
    cfg.validate()?;
    let spec = env.spec().clone();
    if spec.obs_dim != ac.obs_dim() || spec.act_dim != ac.act_dim() {
        return Err(Error::InvalidArgument(format!(
            "policy is {}→{} but {} is {}→{}",
            ac.obs_dim(),
            ac.act_dim(),
            spec.name,
            spec.obs_dim,
            spec.act_dim
        )));
    }
    let started = Instant::now();
    let mut streams = Streams {
        rollout: rng.split("rollout"),
        reset: rng.split("reset"),
        shuffle: rng.split("shuffle"),
    };
    let mut progress = Progress {
        env_steps: 0,
        optimizer_steps: 0,
        episodes: 0,
        obs: env.reset(&mut streams.reset)?,
        episode_return: 0.0,
        recent: VecDeque::with_capacity(RETURN_WINDOW),
    };
    let mut adam = AdamState::new(ac.param_len());
    let mut buffer = RolloutBuffer::new(cfg.rollout_steps);
    let mut records = Vec::with_capacity(cfg.num_updates());

    for update in 1..=cfg.num_updates() {
        let last_good = ac.clone();
        let lr = cfg.learning_rate_at(update);
        let stats = match run_update(ac, env, cfg, lr, &mut streams, &mut progress, &mut adam, &mut buffer) {
            Ok(stats) => stats,
            Err(Error::NonFinite(detail)) => {
                *ac = last_good;
                return Err(Error::NonFinite(format!("update {update}: {detail}")));
            }
            Err(e) => return Err(e),
        };
        let mean_return = if progress.recent.is_empty() {
            f64::NAN
        } else {
            progress.recent.iter().sum::<f64>() / progress.recent.len() as f64
        };
        let record = RunRecord {
            seed,
            steps: progress.env_steps,
            update,
            mean_return,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            clip_fraction: stats.clip_fraction,
            approx_kl: stats.approx_kl,
            wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        on_update(&record, ac)?;
        records.push(record);
    }
    Ok(TrainSummary {
        updates: records.len(),
        env_steps: progress.env_steps,
        optimizer_steps: progress.optimizer_steps,
        episodes: progress.episodes,
        records,
    })
}

fn non_finite_params(ac: &ActorCritic) -> Option<usize> {
    ac.params().iter().position(|p| !p.is_finite())
}

#[allow(clippy::too_many_arguments)]
fn run_update<E: Env + ?Sized>(
    ac: &mut ActorCritic,
    env: &mut E,
    cfg: &PpoConfig,
    lr: f64,
    streams: &mut Streams,
    progress: &mut Progress,
    adam: &mut AdamState,
    buffer: &mut RolloutBuffer,
) -> Result<LossStats> {
    buffer.clear();
    let n = cfg.rollout_steps.min(cfg.total_steps - progress.env_steps);
    for _ in 0..n {
        ac.obs_norm.update(&progress.obs);
        let sample = ac.act_stochastic(&progress.obs, &mut streams.rollout)?;
        let step = env.step(&sample.action)?;
        if !step.reward.is_finite() {
            return Err(Error::NonFinite(format!("environment reward {}", step.reward)));
        }
        progress.env_steps += 1;
        progress.episode_return += step.reward;
        let truncation_value = if step.truncated && !step.terminated {
            ac.value(&step.obs)?
        } else {
            0.0
        };
        buffer.push(Transition {
            input: sample.input,
            action: sample.action,
            reward: step.reward,
            value: sample.value,
            log_prob: sample.log_prob,
            terminated: step.terminated,
            truncated: step.truncated && !step.terminated,
            truncation_value,
        })?;
        if step.done() {
            if progress.recent.len() == RETURN_WINDOW {
                progress.recent.pop_front();
            }
            progress.recent.push_back(progress.episode_return);
            progress.episode_return = 0.0;
            progress.episodes += 1;
            progress.obs = env.reset(&mut streams.reset)?;
        } else {
            progress.obs = step.obs;
        }
    }
    buffer.set_bootstrap(ac.value(&progress.obs)?);

    let gae = buffer.compute_gae(cfg.gamma, cfg.gae_lambda)?;
    let mut batch = TrainingBatch {
        inputs: Vec::with_capacity(n),
        actions: Vec::with_capacity(n),
        old_log_probs: Vec::with_capacity(n),
        advantages: gae.advantages,
        returns: gae.returns,
    };
    for t in buffer.steps() {
        batch.inputs.push(t.input.clone());
        batch.actions.push(t.action.clone());
        batch.old_log_probs.push(t.log_prob);
    }
    if cfg.normalize_advantages {
        normalize_advantages(&mut batch.advantages);
    }

    let coefs = cfg.loss_coefs();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut grads = vec![0.0; ac.param_len()];
    let mut totals = LossStats::default();
    let mut count = 0usize;
    for _ in 0..cfg.epochs {
        streams.shuffle.shuffle(&mut order);
        for chunk in order.chunks(cfg.minibatch_size) {
            let stats = ppo_loss(ac, &batch, chunk, coefs, Some(&mut grads))?;
            if !stats.is_finite() {
                return Err(Error::NonFinite(format!("loss {stats:?}")));
            }
            if let Some(bad) = grads.iter().position(|g| !g.is_finite()) {
                return Err(Error::NonFinite(format!("gradient entry {bad} is {}", grads[bad])));
            }
            if let Some(max_norm) = cfg.max_grad_norm {
                clip_grad_norm(&mut grads, max_norm);
            }
            let mut params = ac.params();
            adam_step(&mut params, &grads, adam, lr)?;
            ac.set_params(&params)?;
            if let Some(bad) = non_finite_params(ac) {
                return Err(Error::NonFinite(format!("parameter {bad} after optimizer step")));
            }
            progress.optimizer_steps += 1;
            totals.total += stats.total;
            totals.policy_loss += stats.policy_loss;
            totals.value_loss += stats.value_loss;
            totals.entropy += stats.entropy;
            totals.clip_fraction += stats.clip_fraction;
            totals.approx_kl += stats.approx_kl;
            count += 1;
        }
    }
    let c = count as f64;
    Ok(LossStats {
        total: totals.total / c,
        policy_loss: totals.policy_loss / c,
        value_loss: totals.value_loss / c,
        entropy: totals.entropy / c,
        clip_fraction: totals.clip_fraction / c,
        approx_kl: totals.approx_kl / c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub returns: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl EvalReport {
    fn from_returns(returns: Vec<f64>) -> Self {
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let std = (returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
        let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
        let max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            returns,
            mean,
            std,
            min,
            max,
        }
    }
}

/// Runs `episodes` episodes with the deterministic (mean) action.
pub fn evaluate<E: Env + ?Sized>(
    ac: &ActorCritic,
    env: &mut E,
    episodes: usize,
    rng: &mut Rng,
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::InvalidArgument("evaluate needs at least one episode".into()));
    }
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = env.reset(rng)?;
        let mut total = 0.0;
        loop {
            let action = ac.act_deterministic(&obs)?;
            let step = env.step(&action)?;
            total += step.reward;
            if step.done() {
                break;
            }
            obs = step.obs;
        }
        returns.push(total);
    }
    Ok(EvalReport::from_returns(returns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvSpec, Pendulum, StepResult};
    use crate::nets::Architecture;
    use crate::spline::SplineConfig;

    fn small_config() -> PpoConfig {
        PpoConfig {
            rollout_steps: 128,
            minibatch_size: 32,
            epochs: 3,
            total_steps: 256,
            ..PpoConfig::default()
        }
    }

    fn run(arch: Architecture, seed: u64, cfg: &PpoConfig) -> (ActorCritic, TrainSummary) {
        let mut rng = Rng::new(seed);
        let mut env = Pendulum::new();
        let spec = env.spec().clone();
        let mut ac = ActorCritic::build(
            arch,
            spec.obs_dim,
            spec.act_dim,
            SplineConfig::default(),
            cfg.normalize_obs,
            &mut rng.split("init"),
        )
        .unwrap();
        let summary = train(&mut ac, &mut env, cfg, seed, &mut rng, &mut |_, _| Ok(())).unwrap();
        (ac, summary)
    }

    #[test]
    fn counts_steps_and_updates() {
        let cfg = small_config();
        let (_, s) = run(Architecture::MlpA2C2, 1, &cfg);
        assert_eq!(s.updates, 2);
        assert_eq!(s.env_steps, 256);
        // K · ⌈T / M⌉ per update
        assert_eq!(s.optimizer_steps, 2 * 3 * 4);
        assert_eq!(s.records.last().unwrap().steps, 256);
        assert_eq!(s.records[0].update, 1);
    }

    #[test]
    fn ragged_minibatches_and_short_final_rollout() {
        let cfg = PpoConfig {
            rollout_steps: 100,
            minibatch_size: 64,
            epochs: 2,
            total_steps: 250,
            ..PpoConfig::default()
        };
        let (_, s) = run(Architecture::MlpA1C2, 2, &cfg);
        assert_eq!(s.updates, 3);
        assert_eq!(s.env_steps, 250);
        // 2 + 2 + 1 chunks per epoch
        assert_eq!(s.optimizer_steps, 2 * (2 + 2 + 1));
    }

    #[test]
    fn same_seed_same_run() {
        let cfg = small_config();
        for arch in [Architecture::MlpA2C2, Architecture::FullKan] {
            let (a, sa) = run(arch, 7, &cfg);
            let (b, sb) = run(arch, 7, &cfg);
            assert_eq!(a.params(), b.params());
            for (ra, rb) in sa.records.iter().zip(&sb.records) {
                assert_eq!(ra.policy_loss.to_bits(), rb.policy_loss.to_bits());
                assert_eq!(ra.mean_return.to_bits(), rb.mean_return.to_bits());
            }
            let (c, _) = run(arch, 8, &cfg);
            assert_ne!(a.params(), c.params());
        }
    }

    #[test]
    fn callback_sees_every_update_and_can_abort() {
        let cfg = small_config();
        let mut rng = Rng::new(3);
        let mut env = Pendulum::new();
        let mut ac =
            ActorCritic::build(Architecture::MlpA2C2, 3, 1, SplineConfig::default(), true, &mut rng)
                .unwrap();
        let mut seen = Vec::new();
        train(&mut ac, &mut env, &cfg, 3, &mut rng, &mut |r, _| {
            seen.push(r.update);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![1, 2]);
        let err = train(&mut ac, &mut env, &cfg, 3, &mut rng, &mut |_, _| {
            Err(Error::InvalidArgument("stop".into()))
        });
        assert!(err.is_err());
    }

    /// Rewards explode after a fixed number of steps.
    struct Exploding {
        spec: EnvSpec,
        t: usize,
        blow_up_at: usize,
    }

    impl Env for Exploding {
        fn spec(&self) -> &EnvSpec {
            &self.spec
        }

        fn reset(&mut self, _rng: &mut Rng) -> Result<Vec<f64>> {
            Ok(vec![0.0; 2])
        }

        fn step(&mut self, _action: &[f64]) -> Result<StepResult> {
            self.t += 1;
            let reward = if self.t >= self.blow_up_at { f64::NAN } else { 1.0 };
            Ok(StepResult {
                obs: vec![self.t as f64 * 0.01, 0.0],
                reward,
                terminated: false,
                truncated: self.t.is_multiple_of(20),
            })
        }
    }

    #[test]
    fn non_finite_restores_last_good_policy() {
        let cfg = PpoConfig {
            rollout_steps: 64,
            minibatch_size: 32,
            epochs: 1,
            total_steps: 256,
            ..PpoConfig::default()
        };
        let mut env = Exploding {
            spec: EnvSpec {
                name: "exploding".into(),
                obs_dim: 2,
                act_dim: 1,
                action_low: vec![-1.0],
                action_high: vec![1.0],
                max_episode_steps: 20,
            },
            t: 0,
            blow_up_at: 150,
        };
        let mut rng = Rng::new(5);
        let mut ac =
            ActorCritic::build(Architecture::MlpA2C2, 2, 1, SplineConfig::default(), true, &mut rng)
                .unwrap();
        let mut snapshots = Vec::new();
        let err = train(&mut ac, &mut env, &cfg, 5, &mut rng, &mut |_, ac| {
            snapshots.push(ac.params());
            Ok(())
        })
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)), "{err}");
        assert_eq!(snapshots.len(), 2);
        assert_eq!(&ac.params(), snapshots.last().unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = Rng::new(0);
        let mut ac =
            ActorCritic::build(Architecture::MlpA2C2, 4, 1, SplineConfig::default(), true, &mut rng)
                .unwrap();
        let mut env = Pendulum::new();
        assert!(train(&mut ac, &mut env, &small_config(), 0, &mut rng, &mut |_, _| Ok(())).is_err());
    }

    #[test]
    fn evaluation_is_deterministic_given_rng() {
        let mut rng = Rng::new(4);
        let ac =
            ActorCritic::build(Architecture::FullKan, 3, 1, SplineConfig::default(), true, &mut rng)
                .unwrap();
        let mut env = Pendulum::new();
        let a = evaluate(&ac, &mut env, 5, &mut Rng::new(9)).unwrap();
        let b = evaluate(&ac, &mut env, 5, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.returns.len(), 5);
        assert!(a.min <= a.mean && a.mean <= a.max);
        assert!(evaluate(&ac, &mut env, 0, &mut rng).is_err());
    }
}
