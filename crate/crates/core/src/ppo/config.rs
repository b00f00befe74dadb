use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::MAX_EPISODE_STEPS;
use crate::error::ConfigError;

/// PPO hyperparameters. Defaults are the values used for every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PPOConfig {
    pub sgd_iters: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub max_episode_len: usize,
    pub rollout_fragment: usize,
    pub train_batch: usize,
    pub minibatch: usize,
    pub total_timesteps: u64,
    pub lr: f64,
    pub kl_coeff_init: f64,
    pub kl_target: f64,
    pub vf_loss_coeff: f64,
    pub entropy_coeff: f64,
    pub clip: f64,
    pub vf_clip: f64,
    pub hidden: Vec<usize>,
    pub use_clip: bool,
    pub use_kl: bool,
    pub normalize_advantages: bool,
}

impl Default for PPOConfig {
    fn default() -> Self {
        Self {
            sgd_iters: 30,
            gamma: 0.99,
            gae_lambda: 0.928544,
            max_episode_len: MAX_EPISODE_STEPS,
            rollout_fragment: 1500,
            train_batch: 1500,
            minibatch: 1500,
            total_timesteps: 5_000_000,
            lr: 5e-5,
            kl_coeff_init: 0.2,
            kl_target: 0.01,
            vf_loss_coeff: 1.0,
            entropy_coeff: 0.0,
            clip: 0.3,
            vf_clip: 10.0,
            hidden: vec![256, 256],
            use_clip: true,
            use_kl: true,
            normalize_advantages: true,
        }
    }
}

impl PPOConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.sgd_iters == 0 {
            return bad("sgd_iters must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!(
                "gamma {} and gae_lambda {} must lie in [0, 1]",
                self.gamma, self.gae_lambda
            ));
        }
        if self.max_episode_len != MAX_EPISODE_STEPS {
            return bad(format!(
                "max_episode_len is fixed by the environment at {MAX_EPISODE_STEPS}, got {}",
                self.max_episode_len
            ));
        }
        if self.train_batch == 0 || self.rollout_fragment == 0 || self.minibatch == 0 {
            return bad("train_batch, rollout_fragment and minibatch must be positive".into());
        }
        if !self.train_batch.is_multiple_of(self.rollout_fragment) {
            return bad(format!(
                "train_batch {} is not a multiple of rollout_fragment {}",
                self.train_batch, self.rollout_fragment
            ));
        }
        if self.minibatch > self.train_batch {
            return bad(format!(
                "minibatch {} exceeds train_batch {}",
                self.minibatch, self.train_batch
            ));
        }
        if self.total_timesteps == 0 {
            return bad("total_timesteps must be positive".into());
        }
        for (name, v) in [
            ("lr", self.lr),
            ("kl_coeff_init", self.kl_coeff_init),
            ("kl_target", self.kl_target),
            ("vf_loss_coeff", self.vf_loss_coeff),
            ("entropy_coeff", self.entropy_coeff),
            ("clip", self.clip),
            ("vf_clip", self.vf_clip),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!(
                "hidden layer sizes must be non-empty and positive, got {:?}",
                self.hidden
            ));
        }
        Ok(())
    }

    /// Number of training iterations needed to reach `total_timesteps`.
    pub fn iterations(&self) -> usize {
        self.total_timesteps.div_ceil(self.train_batch as u64) as usize
    }
}

/// Adaptive KL rule: grow by 1.5 above twice the target, halve below half of it.
pub fn adapt_kl_coeff(coeff: f64, kl: f64, target: f64) -> f64 {
    if kl > 2.0 * target {
        coeff * 1.5
    } else if kl < 0.5 * target {
        coeff * 0.5
    } else {
        coeff
    }
}

/// Short hex digest identifying an observation config and hyperparameter set.
pub fn config_hash(config_name: &str, ppo: &PPOConfig) -> String {
    let body = serde_json::json!({ "config": config_name, "ppo": ppo });
    let digest = Sha256::digest(body.to_string().as_bytes());
    hex::encode(&digest[..8])
}
