use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use inspect_core::ppo::PPOConfig;
use inspect_core::ObsConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_EVAL_EPISODES: usize = 100;

fn default_eval_episodes() -> usize {
    DEFAULT_EVAL_EPISODES
}

/// A seed sweep over one observation config. Stored verbatim in every run
/// manifest it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub config: String,
    pub seeds: Vec<u64>,
    pub total_timesteps: u64,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    pub output_dir: PathBuf,
    /// Hyperparameter overrides keyed by `PPOConfig` field name.
    #[serde(default)]
    pub overrides: Map<String, Value>,
    /// Intermediate checkpoint period in iterations (0: final only).
    #[serde(default)]
    pub checkpoint_interval: usize,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading spec {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing spec {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        ObsConfig::named(&self.config)?;
        if self.seeds.is_empty() {
            bail!("no seeds given");
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            bail!("duplicate seeds in {:?}", self.seeds);
        }
        if self.eval_episodes == 0 {
            bail!("eval_episodes must be positive");
        }
        self.ppo_config()?;
        Ok(())
    }

    /// Defaults with the overrides applied and the spec's timestep budget.
    pub fn ppo_config(&self) -> Result<PPOConfig> {
        let mut base = serde_json::to_value(PPOConfig::default())?;
        let obj = base
            .as_object_mut()
            .expect("config serializes to an object");
        for (k, v) in &self.overrides {
            if k == "total_timesteps" {
                bail!("set total_timesteps at the top level of the spec, not in overrides");
            }
            obj.insert(k.clone(), v.clone());
        }
        obj.insert("total_timesteps".into(), self.total_timesteps.into());
        let config: PPOConfig =
            serde_json::from_value(base).context("invalid hyperparameter override")?;
        config.validate()?;
        Ok(config)
    }

    pub fn run_dir(&self, seed: u64) -> PathBuf {
        run_dir(&self.output_dir, &self.config, seed)
    }
}

pub fn run_dir(root: &Path, config: &str, seed: u64) -> PathBuf {
    root.join(config).join(format!("seed_{seed}"))
}

/// Parses `key=value` where value is JSON, falling back to a bare string.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .with_context(|| format!("override `{s}` is not key=value"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            config: "sun_angle_ups".into(),
            seeds: vec![2875, 5761],
            total_timesteps: 100_000,
            eval_episodes: 100,
            output_dir: "runs".into(),
            overrides: Map::new(),
            checkpoint_interval: 0,
        }
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut s = spec();
        s.overrides.insert("lr".into(), 1e-4.into());
        let c = s.ppo_config().unwrap();
        assert_eq!(c.lr, 1e-4);
        assert_eq!(c.total_timesteps, 100_000);
        s.overrides.insert("lrate".into(), 1.0.into());
        assert!(s.ppo_config().is_err());
    }

    #[test]
    fn unknown_config_lists_valid_names() {
        let s = ExperimentSpec {
            config: "ups_count_sun".into(),
            ..spec()
        };
        let msg = format!("{:#}", s.validate().unwrap_err());
        assert!(
            msg.contains("sun_angle_ups") && msg.contains("frame_all_agent"),
            "{msg}"
        );
    }

    #[test]
    fn spec_json_defaults() {
        let s: ExperimentSpec = serde_json::from_str(
            r#"{"config":"ups","seeds":[1],"total_timesteps":3000,"output_dir":"o"}"#,
        )
        .unwrap();
        assert_eq!(s.eval_episodes, 100);
        assert!(s.overrides.is_empty());
    }

    #[test]
    fn override_parsing() {
        assert_eq!(
            parse_override("lr=0.001").unwrap(),
            ("lr".into(), Value::from(0.001))
        );
        assert_eq!(
            parse_override("hidden=[64,64]").unwrap().1,
            serde_json::json!([64, 64])
        );
        assert!(parse_override("lr").is_err());
    }
}
