//! Spacecraft inspection environment with a PPO trainer and the
//! statistics used to compare observation-space ablations.
//!
//! The deputy moves under Clohessy-Wiltshire relative dynamics around a
//! 99-point spherical chief. Points count as inspected when they are both
//! in view and lit by a sun that circles the chief in the x-y plane.

pub mod analysis;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod geometry;
pub mod ppo;
pub mod seeding;
pub mod sensors;
pub mod ups;

pub use dynamics::{DynamicsParams, HillState, ThrustCommand};
pub use env::{DoneReason, EpisodeMetrics, InspectionEnv, Policy, RewardWeightState};
pub use sensors::{ObsConfig, Observation};
