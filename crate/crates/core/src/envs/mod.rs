//! Environment contract and the built-in control tasks.

mod bridge;
mod cartpole;
mod dims;
pub mod lqr;
mod pendulum;
mod stub;

use std::time::Duration;

pub use bridge::{BridgeEnv, Handshake, Reply, Request};
pub use cartpole::CartPole;
pub use dims::{mujoco_env_dims, MUJOCO_ENVS};
pub use lqr::LqrEnv;
pub use pendulum::Pendulum;
pub use stub::{serve_stub, StubOptions};

use crate::error::{Error, Result};
use crate::numcore::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub max_episode_steps: usize,
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.obs_dim == 0 || self.act_dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "{}: observation and action dims must be >= 1",
                self.name
            )));
        }
        if self.action_low.len() != self.act_dim || self.action_high.len() != self.act_dim {
            return Err(Error::InvalidArgument(format!(
                "{}: action bounds must have {} entries",
                self.name, self.act_dim
            )));
        }
        let finite = self
            .action_low
            .iter()
            .chain(&self.action_high)
            .all(|b| b.is_finite());
        let ordered = self
            .action_low
            .iter()
            .zip(&self.action_high)
            .all(|(lo, hi)| lo <= hi);
        if !finite || !ordered {
            return Err(Error::InvalidArgument(format!(
                "{}: action bounds must be finite with low <= high",
                self.name
            )));
        }
        Ok(())
    }

    /// Clips each component to the action bounds.
    pub fn clip_action(&self, action: &[f64]) -> Result<Vec<f64>> {
        if action.len() != self.act_dim {
            return Err(Error::length("action", self.act_dim, action.len()));
        }
        if let Some(bad) = action.iter().find(|a| !a.is_finite()) {
            return Err(Error::NonFinite(format!("action component {bad}")));
        }
        Ok(action
            .iter()
            .zip(self.action_low.iter().zip(&self.action_high))
            .map(|(a, (lo, hi))| a.clamp(*lo, *hi))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// The task reached a terminal state; no bootstrapping past it.
    pub terminated: bool,
    /// The episode was cut off (time limit); the state is not terminal.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Env {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self, rng: &mut Rng) -> Result<Vec<f64>>;

    /// Advances one tick. Fails if the current episode has ended.
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

impl<E: Env + ?Sized> Env for Box<E> {
    fn spec(&self) -> &EnvSpec {
        (**self).spec()
    }

    fn reset(&mut self, rng: &mut Rng) -> Result<Vec<f64>> {
        (**self).reset(rng)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        (**self).step(action)
    }
}

/// Reset/step bookkeeping shared by the built-in tasks.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    active: bool,
    t: usize,
}

impl EpisodeClock {
    pub(crate) fn start(&mut self) {
        self.active = true;
        self.t = 0;
    }

    pub(crate) fn ensure_active(&self) -> Result<()> {
        if self.active {
            Ok(())
        } else {
            Err(Error::EpisodeEnded)
        }
    }

    /// Counts a step and returns `(terminated, truncated)` given whether the
    /// task itself signalled termination.
    pub(crate) fn tick(&mut self, terminal: bool, horizon: usize) -> (bool, bool) {
        self.t += 1;
        let truncated = !terminal && self.t >= horizon;
        if terminal || truncated {
            self.active = false;
        }
        (terminal, truncated)
    }

    #[cfg(test)]
    pub(crate) fn steps(&self) -> usize {
        self.t
    }
}

pub const BUILTIN_ENVS: [&str; 3] = ["pendulum", "cartpole", "lqr"];

/// Prefix selecting an external environment, e.g. `bridge:python3 env.py`.
pub const BRIDGE_PREFIX: &str = "bridge:";

pub const DEFAULT_BRIDGE_TIMEOUT: Duration = Duration::from_secs(30);

/// Instantiates a built-in task by name, or spawns a bridge child for
/// `bridge:<command line>`.
pub fn make_env(name: &str) -> Result<Box<dyn Env>> {
    if let Some(cmd) = name.strip_prefix(BRIDGE_PREFIX) {
        let argv: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
        return Ok(Box::new(BridgeEnv::spawn(&argv, DEFAULT_BRIDGE_TIMEOUT)?));
    }
    match name {
        "pendulum" => Ok(Box::new(Pendulum::new())),
        "cartpole" => Ok(Box::new(CartPole::new())),
        "lqr" => Ok(Box::new(LqrEnv::new())),
        other => Err(Error::UnknownEnv(other.to_owned())),
    }
}
