use std::f64::consts::PI;

use super::{Env, EnvSpec, EpisodeClock, StepResult};
use crate::error::Result;
use crate::numcore::Rng;

/// Torque-driven pendulum, `m l² θ̈ = −m g l sin θ + u`.
///
/// θ = 0 is the rest position the reward drives towards. Integration is
/// semi-implicit Euler (velocity first, then angle). Observation is
/// `[cos θ, sin θ, θ̇]`; reward is `−(wrap(θ)² + 0.1 θ̇² + 0.001 u²)` on the
/// pre-step state and clipped torque. Episodes are truncated after 200 steps.
#[derive(Debug, Clone)]
pub struct Pendulum {
    spec: EnvSpec,
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub dt: f64,
    theta: f64,
    theta_dot: f64,
    clock: EpisodeClock,
}

pub const PENDULUM_MAX_TORQUE: f64 = 2.0;
pub const PENDULUM_HORIZON: usize = 200;

/// Angle mapped to `[−π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Pendulum {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "pendulum".into(),
                obs_dim: 3,
                act_dim: 1,
                action_low: vec![-PENDULUM_MAX_TORQUE],
                action_high: vec![PENDULUM_MAX_TORQUE],
                max_episode_steps: PENDULUM_HORIZON,
            },
            mass: 1.0,
            length: 1.0,
            gravity: 10.0,
            dt: 0.05,
            theta: 0.0,
            theta_dot: 0.0,
            clock: EpisodeClock::default(),
        }
    }

    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::new() }
    }

    pub fn state(&self) -> (f64, f64) {
        (self.theta, self.theta_dot)
    }

    /// Starts an episode from an explicit state.
    pub fn reset_to(&mut self, theta: f64, theta_dot: f64) -> Vec<f64> {
        self.theta = theta;
        self.theta_dot = theta_dot;
        self.clock.start();
        self.observe()
    }

    /// Kinetic plus potential energy, zero at rest at θ = 0.
    pub fn energy(&self) -> f64 {
        let (m, l, g) = (self.mass, self.length, self.gravity);
        0.5 * m * l * l * self.theta_dot * self.theta_dot + m * g * l * (1.0 - self.theta.cos())
    }

    fn observe(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }
}

impl Env for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Result<Vec<f64>> {
        let theta = rng.uniform(-PI, PI);
        let theta_dot = rng.uniform(-1.0, 1.0);
        Ok(self.reset_to(theta, theta_dot))
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.clock.ensure_active()?;
        let u = self.spec.clip_action(action)?[0];
        let th = wrap_angle(self.theta);
        let reward = -(th * th + 0.1 * self.theta_dot * self.theta_dot + 0.001 * u * u);

        let (m, l, g) = (self.mass, self.length, self.gravity);
        let accel = (-m * g * l * self.theta.sin() + u) / (m * l * l);
        self.theta_dot += self.dt * accel;
        self.theta += self.dt * self.theta_dot;

        let (terminated, truncated) = self.clock.tick(false, self.spec.max_episode_steps);
        Ok(StepResult {
            obs: self.observe(),
            reward,
            terminated,
            truncated,
        })
    }
}
