//! Proximal policy optimization with a clipped surrogate.

mod adam;
mod buffer;
mod loss;
mod train;

pub use adam::{adam_step, clip_grad_norm, AdamState};
pub use buffer::{normalize_advantages, Gae, RolloutBuffer, Transition};
pub use loss::{clipped_surrogate, combined_loss, ppo_loss, LossCoefs, LossStats, TrainingBatch};
pub use train::{evaluate, train, EvalReport, RunRecord, TrainSummary};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub clip_eps: f64,
    /// Optimization passes over each rollout.
    pub epochs: usize,
    pub minibatch_size: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Environment steps collected per update.
    pub rollout_steps: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Global gradient-norm cap; `None` disables clipping.
    pub max_grad_norm: Option<f64>,
    pub total_steps: usize,
    pub normalize_advantages: bool,
    pub normalize_obs: bool,
    /// Decay the learning rate linearly to zero over the run.
    pub anneal_lr: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            clip_eps: 0.2,
            epochs: 10,
            minibatch_size: 64,
            gamma: 0.99,
            gae_lambda: 0.95,
            rollout_steps: 2048,
            value_coef: 0.5,
            entropy_coef: 0.0,
            max_grad_norm: Some(0.5),
            total_steps: 1_000_000,
            normalize_advantages: true,
            normalize_obs: true,
            anneal_lr: false,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return bad(format!("clip_eps must lie in (0, 1), got {}", self.clip_eps));
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!(
                "gamma and gae_lambda must lie in [0, 1], got {} and {}",
                self.gamma, self.gae_lambda
            ));
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.rollout_steps == 0 {
            return bad("epochs, minibatch_size and rollout_steps must be positive".into());
        }
        if self.minibatch_size > self.rollout_steps {
            return bad(format!(
                "minibatch_size {} exceeds rollout_steps {}",
                self.minibatch_size, self.rollout_steps
            ));
        }
        if self.total_steps < self.rollout_steps {
            return bad(format!(
                "total_steps {} is below rollout_steps {}",
                self.total_steps, self.rollout_steps
            ));
        }
        if !(self.value_coef >= 0.0 && self.entropy_coef >= 0.0) {
            return bad("value_coef and entropy_coef must be non-negative".into());
        }
        if let Some(n) = self.max_grad_norm {
            if n.is_nan() || n <= 0.0 {
                return bad(format!("max_grad_norm must be positive, got {n}"));
            }
        }
        Ok(())
    }

    /// Number of updates a run performs; the last rollout may be shorter.
    pub fn num_updates(&self) -> usize {
        self.total_steps.div_ceil(self.rollout_steps)
    }

    /// Learning rate used during the 1-based update `update`.
    pub fn learning_rate_at(&self, update: usize) -> f64 {
        if self.anneal_lr {
            let frac = (update - 1) as f64 / self.num_updates() as f64;
            self.learning_rate * (1.0 - frac)
        } else {
            self.learning_rate
        }
    }

    pub fn loss_coefs(&self) -> LossCoefs {
        LossCoefs {
            clip_eps: self.clip_eps,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = PpoConfig::default();
        c.validate().unwrap();
        assert_eq!(c.num_updates(), 489);
    }

    #[test]
    fn annealing_schedule() {
        let mut c = PpoConfig {
            total_steps: 4 * 2048,
            ..PpoConfig::default()
        };
        assert_eq!(c.learning_rate_at(3), 3e-4);
        c.anneal_lr = true;
        assert_eq!(c.learning_rate_at(1), 3e-4);
        assert!((c.learning_rate_at(4) - 0.75e-4).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_values() {
        let cases: [fn(&mut PpoConfig); 6] = [
            |c| c.clip_eps = 1.0,
            |c| c.gamma = 1.5,
            |c| c.minibatch_size = 0,
            |c| c.minibatch_size = 4096,
            |c| c.total_steps = 10,
            |c| c.learning_rate = -1.0,
        ];
        for f in cases {
            let mut c = PpoConfig::default();
            f(&mut c);
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn json_roundtrip_and_partial() {
        let c = PpoConfig::default();
        let back: PpoConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let partial: PpoConfig = serde_json::from_str(r#"{"epochs": 4}"#).unwrap();
        assert_eq!(partial.epochs, 4);
        assert_eq!(partial.rollout_steps, 2048);
        assert!(serde_json::from_str::<PpoConfig>(r#"{"epoch": 4}"#).is_err());
    }
}
