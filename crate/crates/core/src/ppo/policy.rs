use rand::Rng;

use crate::dynamics::ThrustCommand;
use crate::env::Policy;
use crate::ppo::distribution::{mode, sample, to_command};
use crate::ppo::network::ActorCritic;
use crate::sensors::Observation;

/// Picks the most likely choice on every axis.
pub struct GreedyPolicy<'a> {
    pub net: &'a ActorCritic,
}

impl Policy for GreedyPolicy<'_> {
    fn act(&mut self, obs: &Observation) -> ThrustCommand {
        let (logits, _) = self.net.evaluate_one(&obs.values);
        to_command(&mode(&logits))
    }
}

/// Samples from the policy distribution.
pub struct SampledPolicy<'a, R> {
    pub net: &'a ActorCritic,
    pub rng: R,
}

impl<R: Rng> Policy for SampledPolicy<'_, R> {
    fn act(&mut self, obs: &Observation) -> ThrustCommand {
        let (logits, _) = self.net.evaluate_one(&obs.values);
        to_command(&sample(&logits, &mut self.rng))
    }
}
