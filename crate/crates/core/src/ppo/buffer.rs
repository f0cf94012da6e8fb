use crate::error::{Error, Result};

/// One environment transition as seen by the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Normalized observation fed to the networks.
    pub input: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    /// `V(s_t)` at collection time.
    pub value: f64,
    pub log_prob: f64,
    /// The episode reached a terminal state after this step.
    pub terminated: bool,
    /// The episode was cut off after this step; `truncation_value` holds
    /// `V(s_{t+1})` for bootstrapping.
    pub truncated: bool,
    pub truncation_value: f64,
}

impl Transition {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    capacity: usize,
    steps: Vec<Transition>,
    bootstrap_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gae {
    pub advantages: Vec<f64>,
    /// Value targets: advantages + values.
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            steps: Vec::with_capacity(capacity),
            bootstrap_value: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.steps.len() >= self.capacity
    }

    pub fn steps(&self) -> &[Transition] {
        &self.steps
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if self.is_full() {
            return Err(Error::InvalidArgument(format!(
                "rollout buffer is full ({} steps)",
                self.capacity
            )));
        }
        self.steps.push(t);
        Ok(())
    }

    /// `V(s_T)` for the state following the last stored step.
    pub fn set_bootstrap(&mut self, value: f64) {
        self.bootstrap_value = Some(value);
    }

    pub fn clear(&mut self) {
        self.steps.clear();
        self.bootstrap_value = None;
    }

    /// Generalized advantage estimates by the backward recursion
    ///
    /// `δ_t = r_t + γ V(s_{t+1}) (1 − terminated_t) − V(s_t)`,
    /// `A_t = δ_t + γλ (1 − done_t) A_{t+1}`,
    ///
    /// where `V(s_{t+1})` is the truncation value at a time limit, the
    /// bootstrap value after the last step and the next stored value
    /// otherwise.
    pub fn compute_gae(&self, gamma: f64, lambda: f64) -> Result<Gae> {
        if self.steps.is_empty() {
            return Err(Error::InvalidArgument("compute_gae on an empty buffer".into()));
        }
        let last_next = self.bootstrap_value.ok_or_else(|| {
            Error::InvalidArgument("compute_gae needs a bootstrap value".into())
        })?;
        let n = self.steps.len();
        let mut advantages = vec![0.0; n];
        let mut next_adv = 0.0;
        for t in (0..n).rev() {
            let s = &self.steps[t];
            let next_value = if s.terminated {
                0.0
            } else if s.truncated {
                s.truncation_value
            } else if t + 1 < n {
                self.steps[t + 1].value
            } else {
                last_next
            };
            let delta = s.reward + gamma * next_value - s.value;
            let carry = if s.done() { 0.0 } else { gamma * lambda * next_adv };
            advantages[t] = delta + carry;
            next_adv = advantages[t];
        }
        let returns = advantages
            .iter()
            .zip(&self.steps)
            .map(|(a, s)| a + s.value)
            .collect();
        Ok(Gae {
            advantages,
            returns,
        })
    }
}

/// Shift to zero mean and scale to unit (population) standard deviation.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.len() < 2 {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        adv.iter_mut().for_each(|a| *a -= mean);
        return;
    }
    adv.iter_mut().for_each(|a| *a = (*a - mean) / std);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(reward: f64, value: f64) -> Transition {
        Transition {
            input: vec![],
            action: vec![],
            reward,
            value,
            log_prob: 0.0,
            terminated: false,
            truncated: false,
            truncation_value: 0.0,
        }
    }

    #[test]
    fn lambda_zero_is_td_error() {
        let mut buf = RolloutBuffer::new(4);
        for (r, v) in [(1.0, 0.5), (0.0, 0.2), (-1.0, 0.1), (2.0, 0.3)] {
            buf.push(step(r, v)).unwrap();
        }
        buf.set_bootstrap(0.7);
        let gae = buf.compute_gae(0.9, 0.0).unwrap();
        let values = [0.5, 0.2, 0.1, 0.3, 0.7];
        let rewards = [1.0, 0.0, -1.0, 2.0];
        for t in 0..4 {
            let delta = rewards[t] + 0.9 * values[t + 1] - values[t];
            assert_eq!(gae.advantages[t], delta);
        }
    }

    #[test]
    fn three_step_direct_sum() {
        let mut buf = RolloutBuffer::new(3);
        for _ in 0..3 {
            buf.push(step(1.0, 0.0)).unwrap();
        }
        buf.set_bootstrap(0.0);
        let gae = buf.compute_gae(0.99, 0.95).unwrap();
        let gl: f64 = 0.99 * 0.95;
        // all δ = 1
        let expected = [1.0 + gl + gl * gl, 1.0 + gl, 1.0];
        for (a, e) in gae.advantages.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(gae.returns, gae.advantages);
    }

    #[test]
    fn terminal_step_truncates() {
        let mut buf = RolloutBuffer::new(3);
        buf.push(step(1.0, 0.4)).unwrap();
        let mut end = step(3.0, 0.6);
        end.terminated = true;
        buf.push(end).unwrap();
        buf.push(step(5.0, 9.0)).unwrap();
        buf.set_bootstrap(1.0);
        let gae = buf.compute_gae(0.99, 0.95).unwrap();
        assert_eq!(gae.advantages[1], 3.0 - 0.6);
    }

    #[test]
    fn truncation_bootstraps_but_does_not_propagate() {
        let mut buf = RolloutBuffer::new(2);
        let mut cut = step(1.0, 0.5);
        cut.truncated = true;
        cut.truncation_value = 2.0;
        buf.push(cut).unwrap();
        buf.push(step(7.0, 3.0)).unwrap();
        buf.set_bootstrap(0.0);
        let gae = buf.compute_gae(0.5, 0.9).unwrap();
        assert_eq!(gae.advantages[0], 1.0 + 0.5 * 2.0 - 0.5);
    }

    #[test]
    fn errors() {
        let buf = RolloutBuffer::new(2);
        assert!(buf.compute_gae(0.99, 0.95).is_err());
        let mut buf = RolloutBuffer::new(1);
        buf.push(step(0.0, 0.0)).unwrap();
        assert!(buf.compute_gae(0.99, 0.95).is_err());
        assert!(buf.push(step(0.0, 0.0)).is_err());
        buf.clear();
        assert!(buf.is_empty());
    }

    #[test]
    fn normalization() {
        let mut adv: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() * 5.0 + 2.0).collect();
        normalize_advantages(&mut adv);
        let n = adv.len() as f64;
        let mean = adv.iter().sum::<f64>() / n;
        let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-10);
        assert!((std - 1.0).abs() < 1e-6);
    }
}
