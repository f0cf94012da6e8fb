use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Network;
use crate::error::{Error, Result};
use crate::spline::SplineConfig;

/// Hidden width of every dense hidden layer.
pub const HIDDEN_WIDTH: usize = 64;

/// The four actor/critic configurations compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Two hidden layers of 64 units in both actor and critic.
    MlpA2C2,
    /// One hidden layer in the actor, two in the critic.
    MlpA1C2,
    /// Single-layer KAN actor, two-hidden-layer MLP critic.
    KanActorMlpCritic,
    /// Single-layer KAN actor and single-layer KAN critic.
    FullKan,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::FullKan,
        Architecture::KanActorMlpCritic,
        Architecture::MlpA2C2,
        Architecture::MlpA1C2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::MlpA2C2 => "mlp_a2_c2",
            Architecture::MlpA1C2 => "mlp_a1_c2",
            Architecture::KanActorMlpCritic => "kan_actor_mlp_critic",
            Architecture::FullKan => "full_kan",
        }
    }

    pub fn actor(self, obs_dim: usize, act_dim: usize, spline: SplineConfig) -> Network {
        match self {
            Architecture::MlpA2C2 => Network::mlp(obs_dim, &[HIDDEN_WIDTH, HIDDEN_WIDTH], act_dim),
            Architecture::MlpA1C2 => Network::mlp(obs_dim, &[HIDDEN_WIDTH], act_dim),
            Architecture::KanActorMlpCritic | Architecture::FullKan => {
                Network::kan(&[obs_dim, act_dim], spline)
            }
        }
    }

    pub fn critic(self, obs_dim: usize, spline: SplineConfig) -> Network {
        match self {
            Architecture::FullKan => Network::kan(&[obs_dim, 1], spline),
            _ => Network::mlp(obs_dim, &[HIDDEN_WIDTH, HIDDEN_WIDTH], 1),
        }
    }

    pub fn param_counts(self, obs_dim: usize, act_dim: usize, spline: SplineConfig) -> ParamCounts {
        ParamCounts::new(
            self.actor(obs_dim, act_dim, spline).count_params(),
            self.critic(obs_dim, spline).count_params(),
        )
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown architecture `{s}` (expected one of mlp_a2_c2, mlp_a1_c2, kan_actor_mlp_critic, full_kan)"
                ))
            })
    }
}

/// Trainable parameter counts; the policy log-std is not included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCounts {
    pub actor: usize,
    pub critic: usize,
    pub total: usize,
}

impl ParamCounts {
    pub fn new(actor: usize, critic: usize) -> Self {
        Self {
            actor,
            critic,
            total: actor + critic,
        }
    }

    /// Cross-environment average. Actor and critic averages are each rounded
    /// half-up to an integer and the total is their sum.
    pub fn average(rows: &[ParamCounts]) -> Option<ParamCounts> {
        if rows.is_empty() {
            return None;
        }
        let n = rows.len();
        let actor = round_half_up_div(rows.iter().map(|r| r.actor).sum(), n);
        let critic = round_half_up_div(rows.iter().map(|r| r.critic).sum(), n);
        Some(ParamCounts::new(actor, critic))
    }
}

/// `round(sum / n)` with ties going up, in exact integer arithmetic.
pub fn round_half_up_div(sum: usize, n: usize) -> usize {
    (2 * sum + n) / (2 * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for a in Architecture::ALL {
            assert_eq!(a.name().parse::<Architecture>().unwrap(), a);
        }
        assert!("mlp".parse::<Architecture>().is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_up_div(2489, 6), 415); // 414.83
        assert_eq!(round_half_up_div(400, 6), 67); // 66.67
        assert_eq!(round_half_up_div(3, 2), 2); // 1.5
        assert_eq!(round_half_up_div(5, 2), 3); // 2.5
        assert_eq!(round_half_up_div(7, 3), 2);
    }
}
