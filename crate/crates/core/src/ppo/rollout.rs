//! On-policy experience collection from a single environment whose
//! episodes run across batch boundaries.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;

use crate::env::{EpisodeMetrics, EpisodeState, InspectionEnv, RewardWeightState};
use crate::error::EnvError;
use crate::ppo::distribution::{joint_log_prob, sample, to_command, ACTION_LOGITS, NUM_AXES};
use crate::ppo::network::ActorCritic;
use crate::seeding::{stream_rng, Stream};
use crate::sensors::Observation;

#[derive(Debug, Clone)]
pub struct Rollout {
    pub obs: Array2<f64>,
    pub actions: Vec<[usize; NUM_AXES]>,
    pub log_probs: Vec<f64>,
    pub logits: Array2<f64>,
    pub values: Vec<f64>,
    /// Environment rewards; on truncated steps γ·V(final obs) is folded in.
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    /// Value of the observation following the last step, 0 if it ended an episode.
    pub last_value: f64,
    pub finished: Vec<EpisodeMetrics>,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

pub struct RolloutCollector {
    env: InspectionEnv,
    seed: u64,
    episodes_started: u64,
    state: EpisodeState,
    obs: Observation,
    action_rng: ChaCha8Rng,
}

impl RolloutCollector {
    pub fn new(env: InspectionEnv, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::TrainEnv, 0);
        let (state, obs) = env.reset(&mut rng);
        Self {
            env,
            seed,
            episodes_started: 1,
            state,
            obs,
            action_rng: stream_rng(seed, Stream::ActionSampling, 0),
        }
    }

    pub fn env(&self) -> &InspectionEnv {
        &self.env
    }

    fn start_episode(&mut self) {
        let mut rng = stream_rng(self.seed, Stream::TrainEnv, self.episodes_started);
        self.episodes_started += 1;
        let (state, obs) = self.env.reset(&mut rng);
        self.state = state;
        self.obs = obs;
    }

    pub fn collect(
        &mut self,
        net: &ActorCritic,
        weights: &RewardWeightState,
        steps: usize,
        gamma: f64,
    ) -> Result<Rollout, EnvError> {
        let dim = self.env.obs_len();
        let mut obs = Array2::zeros((steps, dim));
        let mut logits_out = Array2::zeros((steps, ACTION_LOGITS));
        let mut rollout = Rollout {
            obs: Array2::zeros((0, dim)),
            actions: Vec::with_capacity(steps),
            log_probs: Vec::with_capacity(steps),
            logits: Array2::zeros((0, ACTION_LOGITS)),
            values: Vec::with_capacity(steps),
            rewards: Vec::with_capacity(steps),
            dones: Vec::with_capacity(steps),
            last_value: 0.0,
            finished: Vec::new(),
        };
        for t in 0..steps {
            let (logits, value) = net.evaluate_one(&self.obs.values);
            let action = sample(&logits, &mut self.action_rng);
            obs.row_mut(t)
                .iter_mut()
                .zip(&self.obs.values)
                .for_each(|(o, v)| *o = *v);
            logits_out
                .row_mut(t)
                .iter_mut()
                .zip(&logits)
                .for_each(|(o, v)| *o = *v);
            rollout.actions.push(action);
            rollout.log_probs.push(joint_log_prob(&logits, &action));
            rollout.values.push(value);

            let out = self
                .env
                .step(&mut self.state, &to_command(&action), weights)?;
            let mut reward = out.reward;
            match out.done {
                Some(reason) => {
                    if !reason.is_terminal() {
                        reward += gamma * net.evaluate_one(&out.observation.values).1;
                    }
                    rollout
                        .finished
                        .push(self.env.metrics(&self.state).expect("episode is done"));
                    rollout.dones.push(true);
                    self.start_episode();
                }
                None => {
                    rollout.dones.push(false);
                    self.obs = out.observation;
                }
            }
            rollout.rewards.push(reward);
        }
        if rollout.dones.last() == Some(&false) {
            rollout.last_value = net.evaluate_one(&self.obs.values).1;
        }
        rollout.obs = obs;
        rollout.logits = logits_out;
        Ok(rollout)
    }
}
