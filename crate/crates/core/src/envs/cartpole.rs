use super::{Env, EnvSpec, EpisodeClock, StepResult};
use crate::error::Result;
use crate::numcore::Rng;

/// Cart-pole with a continuous force input.
///
/// Classic equations of motion (pole half-length 0.5, pole mass 0.1, cart
/// mass 1.0), semi-implicit Euler with `dt = 0.02`. The action in `[−1, 1]`
/// is scaled to a force of up to 10 N. Reward is +1 per step; the episode
/// terminates once `|θ| > 12°` or `|x| > 2.4` and is truncated at 500 steps.
/// Observation is `[x, ẋ, θ, θ̇]`.
#[derive(Debug, Clone)]
pub struct CartPole {
    spec: EnvSpec,
    state: [f64; 4],
    clock: EpisodeClock,
}

pub const CARTPOLE_GRAVITY: f64 = 9.8;
pub const CARTPOLE_CART_MASS: f64 = 1.0;
pub const CARTPOLE_POLE_MASS: f64 = 0.1;
pub const CARTPOLE_HALF_LENGTH: f64 = 0.5;
pub const CARTPOLE_FORCE_MAG: f64 = 10.0;
pub const CARTPOLE_DT: f64 = 0.02;
pub const CARTPOLE_THETA_LIMIT: f64 = 12.0 * std::f64::consts::PI / 180.0;
pub const CARTPOLE_X_LIMIT: f64 = 2.4;
pub const CARTPOLE_HORIZON: usize = 500;

/// `(ẍ, θ̈)` for state `[x, ẋ, θ, θ̇]` under horizontal force `force`.
pub fn cartpole_accel(state: &[f64; 4], force: f64) -> (f64, f64) {
    let [_, _, theta, theta_dot] = *state;
    let total = CARTPOLE_CART_MASS + CARTPOLE_POLE_MASS;
    let pml = CARTPOLE_POLE_MASS * CARTPOLE_HALF_LENGTH;
    let (sin, cos) = theta.sin_cos();
    let temp = (force + pml * theta_dot * theta_dot * sin) / total;
    let theta_acc = (CARTPOLE_GRAVITY * sin - cos * temp)
        / (CARTPOLE_HALF_LENGTH * (4.0 / 3.0 - CARTPOLE_POLE_MASS * cos * cos / total));
    let x_acc = temp - pml * theta_acc * cos / total;
    (x_acc, theta_acc)
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl CartPole {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "cartpole".into(),
                obs_dim: 4,
                act_dim: 1,
                action_low: vec![-1.0],
                action_high: vec![1.0],
                max_episode_steps: CARTPOLE_HORIZON,
            },
            state: [0.0; 4],
            clock: EpisodeClock::default(),
        }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    pub fn reset_to(&mut self, state: [f64; 4]) -> Vec<f64> {
        self.state = state;
        self.clock.start();
        self.state.to_vec()
    }
}

impl Env for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Result<Vec<f64>> {
        let mut s = [0.0; 4];
        for v in &mut s {
            *v = rng.uniform(-0.05, 0.05);
        }
        Ok(self.reset_to(s))
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.clock.ensure_active()?;
        let force = CARTPOLE_FORCE_MAG * self.spec.clip_action(action)?[0];
        let (x_acc, theta_acc) = cartpole_accel(&self.state, force);
        let [x, x_dot, theta, theta_dot] = &mut self.state;
        *x_dot += CARTPOLE_DT * x_acc;
        *x += CARTPOLE_DT * *x_dot;
        *theta_dot += CARTPOLE_DT * theta_acc;
        *theta += CARTPOLE_DT * *theta_dot;

        let fell = self.state[2].abs() > CARTPOLE_THETA_LIMIT || self.state[0].abs() > CARTPOLE_X_LIMIT;
        let (terminated, truncated) = self.clock.tick(fell, self.spec.max_episode_steps);
        Ok(StepResult {
            obs: self.state.to_vec(),
            reward: 1.0,
            terminated,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fine-step RK4 integration of the same ODE; returns the breach time.
    fn rk4_breach_time(state: [f64; 4], h: f64) -> f64 {
        let deriv = |s: &[f64; 4]| {
            let (xa, ta) = cartpole_accel(s, 0.0);
            [s[1], xa, s[3], ta]
        };
        let add = |s: &[f64; 4], k: &[f64; 4], c: f64| {
            [s[0] + c * k[0], s[1] + c * k[1], s[2] + c * k[2], s[3] + c * k[3]]
        };
        let mut s = state;
        let mut t = 0.0;
        while s[2].abs() <= CARTPOLE_THETA_LIMIT && s[0].abs() <= CARTPOLE_X_LIMIT {
            let k1 = deriv(&s);
            let k2 = deriv(&add(&s, &k1, h / 2.0));
            let k3 = deriv(&add(&s, &k2, h / 2.0));
            let k4 = deriv(&add(&s, &k3, h));
            for i in 0..4 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        t
    }

    #[test]
    fn unforced_pole_falls_after_fifty_steps() {
        let start = [0.0, 0.0, 1e-3, 0.0];
        let mut env = CartPole::new();
        env.reset_to(start);
        let mut steps = 0;
        loop {
            let r = env.step(&[0.0]).unwrap();
            steps += 1;
            if r.terminated {
                break;
            }
            assert!(!r.truncated);
        }
        let oracle_steps = rk4_breach_time(start, 1e-5) / CARTPOLE_DT;
        assert!(steps >= 50, "fell after {steps} steps");
        // Euler at dt = 0.02 tracks the exact breach to within a few ticks.
        assert!((steps as f64 - oracle_steps).abs() < 4.0, "{steps} vs {oracle_steps}");
    }

    #[test]
    fn exact_upright_is_an_equilibrium() {
        let mut env = CartPole::new();
        env.reset_to([0.0; 4]);
        for _ in 0..CARTPOLE_HORIZON - 1 {
            let r = env.step(&[0.0]).unwrap();
            assert_eq!(r.obs, vec![0.0; 4]);
            assert_eq!(r.reward, 1.0);
        }
        assert!(env.step(&[0.0]).unwrap().truncated);
    }

    #[test]
    fn push_moves_cart() {
        let mut env = CartPole::new();
        env.reset_to([0.0; 4]);
        let r = env.step(&[1.0]).unwrap();
        assert!(r.obs[1] > 0.0 && r.obs[3] < 0.0);
    }
}
