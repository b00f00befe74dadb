use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::env::{EpisodeMetrics, InspectionEnv, RewardWeightState};
use crate::error::{IoError, TrainError};
use crate::geometry::NUM_POINTS;
use crate::ppo::adam::Adam;
use crate::ppo::config::PPOConfig;
use crate::ppo::gae::{gae_advantages, normalize};
use crate::ppo::loss::TrainBatch;
use crate::ppo::network::{ActorCritic, NetworkSpec};
use crate::ppo::rollout::{Rollout, RolloutCollector};
use crate::ppo::update::{ppo_update, UpdateStats};
use crate::seeding::{stream_rng, Stream};
use crate::sensors::ObsConfig;

/// Everything a single training run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub config_name: String,
    pub obs: ObsConfig,
    pub seed: u64,
    pub ppo: PPOConfig,
    /// Checkpoint every this many iterations (0: only at the end).
    pub checkpoint_interval: usize,
}

impl RunConfig {
    pub fn new(
        config_name: &str,
        seed: u64,
        ppo: PPOConfig,
    ) -> Result<Self, crate::error::ConfigError> {
        let obs = ObsConfig::named(config_name)?;
        ppo.validate()?;
        Ok(Self {
            config_name: config_name.to_string(),
            obs,
            seed,
            ppo,
            checkpoint_interval: 0,
        })
    }
}

/// One row of the training log. Episode statistics cover the episodes that
/// finished during the iteration; when none did, the previous row's values
/// are repeated and `episodes` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub timesteps: u64,
    pub episodes: usize,
    pub mean_reward: f64,
    pub mean_inspected: f64,
    pub mean_length: f64,
    pub success_rate: f64,
    pub mean_delta_v: f64,
    /// Fuel weight in effect while the iteration's samples were collected.
    pub w: f64,
    pub kl: f64,
    pub kl_coeff: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

pub const METRICS_HEADER: [&str; 14] = [
    "iteration",
    "timesteps",
    "episodes",
    "mean_reward",
    "mean_inspected",
    "mean_length",
    "success_rate",
    "mean_delta_v",
    "w",
    "kl",
    "kl_coeff",
    "policy_loss",
    "value_loss",
    "entropy",
];

pub trait TrainCallbacks {
    fn on_iteration(
        &mut self,
        _metrics: &IterationMetrics,
        _net: &ActorCritic,
    ) -> Result<(), IoError> {
        Ok(())
    }

    fn on_checkpoint(
        &mut self,
        _metrics: &IterationMetrics,
        _net: &ActorCritic,
    ) -> Result<(), IoError> {
        Ok(())
    }
}

pub struct NoCallbacks;

impl TrainCallbacks for NoCallbacks {}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: ActorCritic,
    pub metrics: Vec<IterationMetrics>,
    pub weights: RewardWeightState,
    pub kl_coeff: f64,
}

pub fn initial_network(run: &RunConfig) -> ActorCritic {
    let spec = NetworkSpec {
        input_dim: run.obs.obs_len(),
        hidden: run.ppo.hidden.clone(),
    };
    ActorCritic::new(spec, &mut stream_rng(run.seed, Stream::PolicyInit, 0))
}

/// GAE, optional normalization, and packing into a training batch.
pub fn build_batch(rollout: Rollout, config: &PPOConfig) -> TrainBatch {
    let (mut advantages, returns) = gae_advantages(
        &rollout.rewards,
        &rollout.values,
        &rollout.dones,
        rollout.last_value,
        config.gamma,
        config.gae_lambda,
    );
    if config.normalize_advantages {
        normalize(&mut advantages);
    }
    TrainBatch {
        obs: rollout.obs,
        actions: rollout.actions,
        old_log_probs: rollout.log_probs,
        old_logits: rollout.logits,
        advantages,
        returns,
    }
}

fn summarize(
    iteration: usize,
    timesteps: u64,
    finished: &[EpisodeMetrics],
    previous: Option<&IterationMetrics>,
    w: f64,
    update: &UpdateStats,
) -> IterationMetrics {
    let mut m = IterationMetrics {
        iteration,
        timesteps,
        episodes: finished.len(),
        mean_reward: f64::NAN,
        mean_inspected: f64::NAN,
        mean_length: f64::NAN,
        success_rate: f64::NAN,
        mean_delta_v: f64::NAN,
        w,
        kl: update.kl,
        kl_coeff: update.kl_coeff,
        policy_loss: update.policy_loss,
        value_loss: update.value_loss,
        entropy: update.entropy,
    };
    if finished.is_empty() {
        if let Some(p) = previous {
            m.mean_reward = p.mean_reward;
            m.mean_inspected = p.mean_inspected;
            m.mean_length = p.mean_length;
            m.success_rate = p.success_rate;
            m.mean_delta_v = p.mean_delta_v;
        }
        return m;
    }
    let n = finished.len() as f64;
    let mean = |f: &dyn Fn(&EpisodeMetrics) -> f64| finished.iter().map(f).sum::<f64>() / n;
    m.mean_reward = mean(&|e| e.total_reward);
    m.mean_inspected = mean(&|e| e.inspected_points as f64);
    m.mean_length = mean(&|e| e.episode_length as f64);
    m.success_rate = mean(&|e| if e.success { 1.0 } else { 0.0 });
    m.mean_delta_v = mean(&|e| e.delta_v);
    m
}

pub fn train(
    run: &RunConfig,
    callbacks: &mut dyn TrainCallbacks,
) -> Result<TrainOutcome, TrainError> {
    run.ppo.validate()?;
    let config = &run.ppo;
    let env = InspectionEnv::new(run.obs);
    let mut collector = RolloutCollector::new(env, run.seed);
    let mut net = initial_network(run);
    let mut adam = Adam::new(net.param_count(), config.lr);
    let mut minibatch_rng = stream_rng(run.seed, Stream::Minibatch, 0);
    let mut weights = RewardWeightState::training();
    let mut kl_coeff = config.kl_coeff_init;
    let mut metrics: Vec<IterationMetrics> = Vec::with_capacity(config.iterations());
    let total = config.iterations();

    for iteration in 1..=total {
        let rollout = collector.collect(&net, &weights, config.train_batch, config.gamma)?;
        let finished = rollout.finished.clone();
        let batch = build_batch(rollout, config);
        let update = ppo_update(
            &mut net,
            &mut adam,
            &batch,
            config,
            kl_coeff,
            &mut minibatch_rng,
        )
        .map_err(|e| match e {
            TrainError::NonFiniteLoss { epoch, detail, .. } => TrainError::NonFiniteLoss {
                iteration,
                epoch,
                detail,
            },
            other => other,
        })?;
        kl_coeff = update.kl_coeff;

        let timesteps = iteration as u64 * config.train_batch as u64;
        let row = summarize(
            iteration,
            timesteps,
            &finished,
            metrics.last(),
            weights.w,
            &update,
        );
        if !finished.is_empty() {
            let frac = finished
                .iter()
                .map(|e| e.inspected_points as f64 / NUM_POINTS as f64)
                .sum::<f64>()
                / finished.len() as f64;
            weights = weights.update(frac);
        }
        callbacks.on_iteration(&row, &net)?;
        let due = run.checkpoint_interval > 0 && iteration % run.checkpoint_interval == 0;
        if due || iteration == total {
            callbacks.on_checkpoint(&row, &net)?;
        }
        log::debug!(
            "seed {} iter {iteration}/{total}: reward {:.3} inspected {:.1} kl {:.4} w {:.5}",
            run.seed,
            row.mean_reward,
            row.mean_inspected,
            row.kl,
            row.w
        );
        metrics.push(row);
    }
    Ok(TrainOutcome {
        net,
        metrics,
        weights,
        kl_coeff,
    })
}

/// Training batch assembled from arbitrary arrays; handy for tests.
pub fn batch_from_parts(
    obs: Array2<f64>,
    actions: Vec<[usize; 3]>,
    old_logits: Array2<f64>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
) -> TrainBatch {
    let old_log_probs = actions
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let row = old_logits.row(i);
            crate::ppo::distribution::joint_log_prob(row.as_slice().expect("contiguous row"), a)
        })
        .collect();
    TrainBatch {
        obs,
        actions,
        old_log_probs,
        old_logits,
        advantages,
        returns,
    }
}
