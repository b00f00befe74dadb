//! Proximal policy optimization with a factored 3×3 categorical policy.

pub mod adam;
pub mod checkpoint;
pub mod config;
pub mod distribution;
pub mod gae;
pub mod loss;
pub mod network;
pub mod policy;
pub mod rollout;
pub mod trainer;
pub mod update;

pub use config::PPOConfig;
pub use network::{ActorCritic, NetworkSpec};
pub use trainer::{train, IterationMetrics, RunConfig, TrainCallbacks, TrainOutcome};
pub use update::{ppo_update, UpdateStats};
