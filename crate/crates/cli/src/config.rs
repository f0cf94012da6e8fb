use std::path::{Path, PathBuf};

use kanppo_core::envs::BRIDGE_PREFIX;
use kanppo_core::nets::Architecture;
use kanppo_core::ppo::PpoConfig;
use kanppo_core::spline::SplineConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Overrides `output_dir` when set.
pub const OUTPUT_ENV_VAR: &str = "KANPPO_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in task name or `bridge:<command line>`.
    pub env: String,
    pub arch: Architecture,
    pub spline: SplineConfig,
    pub ppo: PpoConfig,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: "pendulum".into(),
            arch: Architecture::FullKan,
            spline: SplineConfig::default(),
            ppo: PpoConfig::default(),
            seeds: vec![0, 1, 2, 3, 4],
            output_dir: PathBuf::from("runs"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, e: kanppo_core::Error| CliError::Config(format!("{name}: {e}"));
        if self.env.trim().is_empty() || self.env.trim() == BRIDGE_PREFIX.trim_end_matches(':') {
            return Err(CliError::Config("env: must name a task".into()));
        }
        self.spline.validate().map_err(|e| field("spline", e))?;
        self.ppo.validate().map_err(|e| field("ppo", e))?;
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds: at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(CliError::Config("seeds: duplicate entries".into()));
        }
        Ok(())
    }

    /// `KANPPO_OUT` if set, otherwise `output_dir`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV_VAR) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_experiment_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.ppo.learning_rate, 3e-4);
        assert_eq!(c.ppo.clip_eps, 0.2);
        assert_eq!(c.ppo.epochs, 10);
        assert_eq!(c.ppo.minibatch_size, 64);
        assert_eq!(c.ppo.gamma, 0.99);
        assert_eq!(c.ppo.gae_lambda, 0.95);
        assert_eq!(c.ppo.total_steps, 1_000_000);
        assert_eq!(c.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!((c.spline.order, c.spline.grid), (2, 3));
        c.validate().unwrap();
    }

    #[test]
    fn dump_roundtrips() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let msg = |json: &str| ExperimentConfig::from_json(json).unwrap_err().to_string();
        assert!(msg(r#"{"ppo": {"clip_eps": 2.0}}"#).contains("ppo: "));
        assert!(msg(r#"{"ppo": {"clip_eps": 2.0}}"#).contains("clip_eps"));
        assert!(msg(r#"{"spline": {"grid": 0}}"#).contains("spline: "));
        assert!(msg(r#"{"seeds": []}"#).contains("seeds"));
        assert!(msg(r#"{"seeds": [1, 1]}"#).contains("duplicate"));
        assert!(msg(r#"{"arch": "resnet"}"#).contains("unknown variant"));
        assert!(msg(r#"{"lr": 0.1}"#).contains("unknown field `lr`"));
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c = ExperimentConfig::from_json(r#"{"env": "lqr", "ppo": {"total_steps": 4096}}"#).unwrap();
        assert_eq!(c.env, "lqr");
        assert_eq!(c.ppo.total_steps, 4096);
        assert_eq!(c.ppo.rollout_steps, 2048);
    }
}
