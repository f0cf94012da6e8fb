//! Diagonal-Gaussian actor-critic over [`Network`] trunks.
//!
//! The actor maps an observation to the action mean; the standard deviation
//! is `exp(log_std)` with a learnable, state-independent `log_std`. The
//! critic maps the same observation to a scalar value. Observations pass
//! through an [`ObsNormalizer`] before reaching either network.

use std::f64::consts::{E, PI, TAU};

use crate::error::{Error, Result};
use crate::nets::checkpoint::{CheckpointReader, CheckpointWriter};
use crate::nets::{Architecture, InitScheme, Network, ParamCounts};
use crate::numcore::{sample_gaussian, Rng};
use crate::spline::SplineConfig;

/// Running mean/variance of observations (Welford), applied as
/// `(x - mean) / sqrt(var + 1e-8)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsNormalizer {
    enabled: bool,
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

const NORM_EPS: f64 = 1e-8;

impl ObsNormalizer {
    pub fn new(dim: usize, enabled: bool) -> Self {
        Self {
            enabled,
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Population variance; 1 before any observation has been seen.
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![1.0; self.mean.len()];
        }
        self.m2.iter().map(|m| m / self.count as f64).collect()
    }

    pub fn update(&mut self, obs: &[f64]) {
        if !self.enabled {
            return;
        }
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(obs) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    pub fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        if !self.enabled {
            return obs.to_vec();
        }
        let var = self.variance();
        obs.iter()
            .zip(&self.mean)
            .zip(&var)
            .map(|((x, m), v)| (x - m) / (v + NORM_EPS).sqrt())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSample {
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
    /// Normalized observation the networks saw.
    pub input: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionEvaluation {
    pub log_probs: Vec<f64>,
    pub entropies: Vec<f64>,
    pub values: Vec<f64>,
}

/// `log N(action; mean, diag(exp(log_std)²))`.
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    let half_log_2pi = 0.5 * TAU.ln();
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) * (-ls).exp();
            -half_log_2pi - ls - 0.5 * z * z
        })
        .sum()
}

/// Differential entropy `Σ_d [½ log(2πe) + log σ_d]`.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    let c = 0.5 * (2.0 * PI * E).ln();
    log_std.iter().map(|ls| c + ls).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: Network,
    pub critic: Network,
    pub log_std: Vec<f64>,
    pub obs_norm: ObsNormalizer,
}

impl ActorCritic {
    pub fn new(actor: Network, critic: Network, normalize_obs: bool) -> Result<Self> {
        if critic.n_out() != 1 {
            return Err(Error::InvalidArgument(format!(
                "critic must have one output, has {}",
                critic.n_out()
            )));
        }
        if actor.n_in() != critic.n_in() {
            return Err(Error::Shape {
                op: "ActorCritic::new",
                left: (actor.n_in(), actor.n_out()),
                right: (critic.n_in(), critic.n_out()),
            });
        }
        Ok(Self {
            log_std: vec![0.0; actor.n_out()],
            obs_norm: ObsNormalizer::new(actor.n_in(), normalize_obs),
            actor,
            critic,
        })
    }

    /// Builds and initializes one of the four standard configurations.
    pub fn build(
        arch: Architecture,
        obs_dim: usize,
        act_dim: usize,
        spline: SplineConfig,
        normalize_obs: bool,
        rng: &mut Rng,
    ) -> Result<Self> {
        spline.validate()?;
        let mut actor = arch.actor(obs_dim, act_dim, spline);
        let mut critic = arch.critic(obs_dim, spline);
        actor.init_params(&mut rng.split("actor-init"), &InitScheme::actor());
        critic.init_params(&mut rng.split("critic-init"), &InitScheme::critic());
        Self::new(actor, critic, normalize_obs)
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.n_in()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.n_out()
    }

    /// Network parameter counts, excluding `log_std`.
    pub fn count_params(&self) -> ParamCounts {
        ParamCounts::new(self.actor.count_params(), self.critic.count_params())
    }

    /// Length of [`ActorCritic::params`]: actor, critic, then `log_std`.
    pub fn param_len(&self) -> usize {
        self.actor.count_params() + self.critic.count_params() + self.log_std.len()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = self.actor.params();
        p.extend(self.critic.params());
        p.extend_from_slice(&self.log_std);
        p
    }

    pub fn set_params(&mut self, src: &[f64]) -> Result<()> {
        if src.len() != self.param_len() {
            return Err(Error::length("ActorCritic::set_params", self.param_len(), src.len()));
        }
        let na = self.actor.count_params();
        let nc = self.critic.count_params();
        self.actor.set_params(&src[..na])?;
        self.critic.set_params(&src[na..na + nc])?;
        self.log_std.copy_from_slice(&src[na + nc..]);
        Ok(())
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|l| l.exp()).collect()
    }

    pub fn entropy(&self) -> f64 {
        gaussian_entropy(&self.log_std)
    }

    /// Normalized network input for a raw observation (statistics frozen).
    pub fn features(&self, obs: &[f64]) -> Result<Vec<f64>> {
        if obs.len() != self.obs_dim() {
            return Err(Error::length("observation", self.obs_dim(), obs.len()));
        }
        Ok(self.obs_norm.normalize(obs))
    }

    fn mean_of(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mean = self.actor.predict(input)?;
        if let Some(bad) = mean.iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFinite(format!(
                "actor output {bad} is {} for input {input:?}",
                mean[bad]
            )));
        }
        Ok(mean)
    }

    fn value_of(&self, input: &[f64]) -> Result<f64> {
        let v = self.critic.predict(input)?[0];
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("critic output {v} for input {input:?}")));
        }
        Ok(v)
    }

    pub fn act_stochastic(&self, obs: &[f64], rng: &mut Rng) -> Result<ActionSample> {
        let input = self.features(obs)?;
        let mean = self.mean_of(&input)?;
        let action = mean
            .iter()
            .zip(&self.log_std)
            .map(|(&m, ls)| sample_gaussian(rng, m, ls.exp()))
            .collect::<Result<Vec<_>>>()?;
        let log_prob = gaussian_log_prob(&mean, &self.log_std, &action);
        let value = self.value_of(&input)?;
        Ok(ActionSample {
            action,
            log_prob,
            value,
            input,
        })
    }

    /// The mean action, without exploration noise.
    pub fn act_deterministic(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let input = self.features(obs)?;
        self.mean_of(&input)
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        let input = self.features(obs)?;
        self.value_of(&input)
    }

    /// Log-densities, entropies and values for stored (already normalized)
    /// network inputs and the actions taken from them.
    pub fn evaluate_actions(
        &self,
        inputs: &[Vec<f64>],
        actions: &[Vec<f64>],
    ) -> Result<ActionEvaluation> {
        if inputs.len() != actions.len() {
            return Err(Error::length("evaluate_actions", inputs.len(), actions.len()));
        }
        let entropy = self.entropy();
        let mut out = ActionEvaluation {
            log_probs: Vec::with_capacity(inputs.len()),
            entropies: vec![entropy; inputs.len()],
            values: Vec::with_capacity(inputs.len()),
        };
        for (input, action) in inputs.iter().zip(actions) {
            if action.len() != self.act_dim() {
                return Err(Error::length("evaluate_actions", self.act_dim(), action.len()));
            }
            let mean = self.mean_of(input)?;
            out.log_probs.push(gaussian_log_prob(&mean, &self.log_std, action));
            out.values.push(self.value_of(input)?);
        }
        Ok(out)
    }

    pub fn to_checkpoint(&self) -> String {
        let mut w = CheckpointWriter::new();
        w.network("actor", &self.actor)
            .network("critic", &self.critic)
            .vector("log_std", &self.log_std)
            .integer("obs_norm_enabled", u64::from(self.obs_norm.enabled))
            .integer("obs_norm_count", self.obs_norm.count)
            .vector("obs_norm_mean", &self.obs_norm.mean)
            .vector("obs_norm_m2", &self.obs_norm.m2);
        w.finish()
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut r = CheckpointReader::new(text)?;
        let actor = r.network("actor")?;
        let critic = r.network("critic")?;
        let log_std = r.vector("log_std")?;
        let enabled = r.integer("obs_norm_enabled")? != 0;
        let count = r.integer("obs_norm_count")?;
        let mean = r.vector("obs_norm_mean")?;
        let m2 = r.vector("obs_norm_m2")?;
        r.finish()?;
        let mut ac = Self::new(actor, critic, enabled)?;
        if log_std.len() != ac.act_dim() || mean.len() != ac.obs_dim() || m2.len() != ac.obs_dim() {
            return Err(Error::Checkpoint("vector lengths do not match network dims".into()));
        }
        ac.log_std = log_std;
        ac.obs_norm = ObsNormalizer {
            enabled,
            count,
            mean,
            m2,
        };
        Ok(ac)
    }
}
