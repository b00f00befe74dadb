//! Episode lifecycle for the translational inspection task.
//!
//! A step applies, in order: dynamics, sun motion, point inspection, UPS
//! refresh, reward, termination, observation.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_transition, delta_v, delta_v_from_l1_sum, propagate, DiscreteTransition, DynamicsParams,
    HillState, ThrustCommand,
};
use crate::error::{EnvError, IoError, SensorError};
use crate::geometry::{advance_sun, sun_direction, ChiefModel, PointStatus, SunState};
use crate::seeding::{stream_rng, Stream};
use crate::sensors::{assemble, Frame, ObsConfig, Observation, Segment};
use crate::ups::ClusterState;

pub const MAX_EPISODE_STEPS: usize = 1223;
pub const CRASH_DISTANCE: f64 = 15.0;
pub const MAX_DISTANCE: f64 = 800.0;
pub const POINT_REWARD: f64 = 0.1;
pub const CRASH_PENALTY: f64 = 1.0;
/// Initial positions whose boresight falls within this angle of the sun are negated.
pub const SUN_EXCLUSION_ANGLE: f64 = 30.0 * std::f64::consts::PI / 180.0;

pub const W_INITIAL: f64 = 0.001;
pub const W_MIN: f64 = 0.001;
pub const W_MAX: f64 = 0.1;
pub const W_EVAL: f64 = 0.1;
pub const W_STEP: f64 = 0.00005;
pub const W_RAISE_ABOVE: f64 = 0.90;
pub const W_LOWER_BELOW: f64 = 0.80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DoneReason {
    AllInspected,
    Crash,
    OutOfBounds,
    Timeout,
}

impl DoneReason {
    /// Timeout is a truncation: the state still has a future.
    pub fn is_terminal(self) -> bool {
        !matches!(self, DoneReason::Timeout)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DoneReason::AllInspected => "AllInspected",
            DoneReason::Crash => "Crash",
            DoneReason::OutOfBounds => "OutOfBounds",
            DoneReason::Timeout => "Timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    Training,
    Evaluation,
}

/// Fuel-penalty multiplier w and its schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeightState {
    pub w: f64,
    pub mode: WeightMode,
}

impl RewardWeightState {
    pub fn training() -> Self {
        Self {
            w: W_INITIAL,
            mode: WeightMode::Training,
        }
    }

    pub fn evaluation() -> Self {
        Self {
            w: W_EVAL,
            mode: WeightMode::Evaluation,
        }
    }

    /// Applies one schedule update from last iteration's mean inspected
    /// fraction. Evaluation weights never move.
    pub fn update(&self, mean_inspected_fraction: f64) -> Self {
        if self.mode == WeightMode::Evaluation {
            return *self;
        }
        let mut w = self.w;
        if mean_inspected_fraction > W_RAISE_ABOVE {
            w += W_STEP;
        } else if mean_inspected_fraction < W_LOWER_BELOW {
            w -= W_STEP;
        }
        Self {
            w: w.clamp(W_MIN, W_MAX),
            mode: self.mode,
        }
    }
}

pub fn update_reward_weight(
    weights: &RewardWeightState,
    mean_inspected_fraction: f64,
) -> RewardWeightState {
    weights.update(mean_inspected_fraction)
}

/// Random draws that define an episode's initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSample {
    pub sun_angle: f64,
    pub radius: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub speed: f64,
    pub vel_azimuth: f64,
    pub vel_elevation: f64,
}

impl InitSample {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            sun_angle: rng.gen_range(0.0..=TAU),
            radius: rng.gen_range(50.0..=100.0),
            azimuth: rng.gen_range(0.0..=TAU),
            elevation: rng.gen_range(-FRAC_PI_2..=FRAC_PI_2),
            speed: rng.gen_range(0.0..=0.3),
            vel_azimuth: rng.gen_range(0.0..=TAU),
            vel_elevation: rng.gen_range(-FRAC_PI_2..=FRAC_PI_2),
        }
    }
}

/// (r, azimuth, elevation) → Cartesian.
pub fn spherical_to_cartesian(r: f64, azimuth: f64, elevation: f64) -> Vector3<f64> {
    Vector3::new(
        r * azimuth.cos() * elevation.cos(),
        r * azimuth.sin() * elevation.cos(),
        r * elevation.sin(),
    )
}

/// Initial deputy state and sun, plus whether the sun rule negated the position.
pub fn initial_condition(sample: &InitSample) -> (HillState, SunState, bool) {
    let sun = SunState::new(sample.sun_angle);
    let mut position = spherical_to_cartesian(sample.radius, sample.azimuth, sample.elevation);
    let boresight = -position.normalize();
    let angle = boresight.dot(&sun_direction(&sun)).clamp(-1.0, 1.0).acos();
    let negated = angle < SUN_EXCLUSION_ANGLE;
    if negated {
        position = -position;
    }
    let velocity = spherical_to_cartesian(sample.speed, sample.vel_azimuth, sample.vel_elevation);
    (HillState::new(position, velocity), sun, negated)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub dynamics: HillState,
    pub sun: SunState,
    pub status: PointStatus,
    pub clusters: ClusterState,
    pub step_index: usize,
    /// Σ|F|₁ over the steps taken, accumulated in step order.
    pub thrust_l1_sum: f64,
    pub total_reward: f64,
    pub done: Option<DoneReason>,
    illuminated: Vec<bool>,
    last_agent_ups: Option<Vector3<f64>>,
}

impl EpisodeState {
    pub fn cumulative_delta_v(&self, params: &DynamicsParams) -> f64 {
        delta_v_from_l1_sum(self.thrust_l1_sum, params)
    }

    pub fn inspected(&self) -> usize {
        self.status.inspected_count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub newly_inspected: usize,
    pub delta_v: f64,
    pub done: Option<DoneReason>,
}

/// Summary of one finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub total_reward: f64,
    pub inspected_points: usize,
    pub episode_length: usize,
    pub success: bool,
    pub delta_v: f64,
    pub done_reason: DoneReason,
}

#[derive(Debug, Clone)]
pub struct InspectionEnv {
    params: DynamicsParams,
    transition: DiscreteTransition,
    chief: ChiefModel,
    config: ObsConfig,
}

impl InspectionEnv {
    pub fn new(config: ObsConfig) -> Self {
        Self::with_parts(config, DynamicsParams::default(), ChiefModel::default())
    }

    pub fn with_parts(config: ObsConfig, params: DynamicsParams, chief: ChiefModel) -> Self {
        Self {
            transition: build_transition(&params),
            params,
            chief,
            config,
        }
    }

    pub fn config(&self) -> &ObsConfig {
        &self.config
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    pub fn chief(&self) -> &ChiefModel {
        &self.chief
    }

    pub fn obs_len(&self) -> usize {
        self.config.obs_len()
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> (EpisodeState, Observation) {
        let sample = InitSample::draw(rng);
        let (dynamics, sun, _) = initial_condition(&sample);
        self.reset_to(dynamics, sun)
    }

    /// Starts an episode from an explicit state with nothing inspected.
    pub fn reset_to(&self, dynamics: HillState, sun: SunState) -> (EpisodeState, Observation) {
        let status = PointStatus::new(self.chief.len());
        let mut clusters = ClusterState::default();
        if self.config.use_ups {
            clusters.sense(&status, &self.chief, &dynamics.position, true);
        }
        let mut state = EpisodeState {
            dynamics,
            sun,
            illuminated: self.chief.illuminated_mask(&sun),
            status,
            clusters,
            step_index: 0,
            thrust_l1_sum: 0.0,
            total_reward: 0.0,
            done: None,
            last_agent_ups: None,
        };
        let obs = self.observe(&mut state);
        (state, obs)
    }

    pub fn step(
        &self,
        state: &mut EpisodeState,
        action: &ThrustCommand,
        weights: &RewardWeightState,
    ) -> Result<StepOutcome, EnvError> {
        if let Some(reason) = state.done {
            return Err(EnvError::EpisodeDone(reason));
        }
        state.dynamics = propagate(&state.dynamics, action, &self.transition)?;
        state.sun = advance_sun(&state.sun, &self.params);
        let illuminated = self.chief.illuminated_mask(&state.sun);
        let lighting_changed = illuminated != state.illuminated;
        state.illuminated = illuminated;

        let newly = state
            .status
            .update(&self.chief, &state.dynamics.position, &state.sun);
        if self.config.use_ups && (newly > 0 || lighting_changed) {
            state
                .clusters
                .sense(&state.status, &self.chief, &state.dynamics.position, true);
        }

        state.step_index += 1;
        state.thrust_l1_sum += action.l1_norm();
        let dv = delta_v(action, &self.params);
        let done = check_termination(state);
        let crash = if done == Some(DoneReason::Crash) {
            CRASH_PENALTY
        } else {
            0.0
        };
        let reward = POINT_REWARD * newly as f64 - weights.w * dv - crash;
        state.total_reward += reward;
        state.done = done;

        let observation = self.observe(state);
        Ok(StepOutcome {
            observation,
            reward,
            newly_inspected: newly,
            delta_v: dv,
            done,
        })
    }

    fn observe(&self, state: &mut EpisodeState) -> Observation {
        let ups = state.clusters.output();
        let ups_arg = self.config.use_ups.then_some(&ups);
        let radius = self.chief.radius();
        match assemble(
            &self.config,
            &state.dynamics,
            &state.status,
            &state.sun,
            ups_arg,
            radius,
        ) {
            Ok(obs) => {
                if self.config.use_ups && self.config.ups_frame == Frame::AgentCentered {
                    let seg = obs.segment(Segment::Ups).expect("ups segment present");
                    state.last_agent_ups = Some(Vector3::new(seg[0], seg[1], seg[2]));
                }
                obs
            }
            Err(SensorError::DegenerateDirection) => {
                // deputy sits on the cluster point: reuse the last agent-frame reading
                let fallback = state.last_agent_ups.unwrap_or(-state.clusters.output());
                let chief_frame = ObsConfig {
                    ups_frame: Frame::ChiefCentered,
                    ..self.config
                };
                let mut obs = assemble(
                    &chief_frame,
                    &state.dynamics,
                    &state.status,
                    &state.sun,
                    ups_arg,
                    radius,
                )
                .expect("chief-frame assembly cannot fail with a UPS vector");
                let n = obs.values.len();
                obs.values[n - 3..].copy_from_slice(fallback.as_slice());
                obs
            }
            Err(SensorError::MissingUps) => {
                unreachable!("UPS vector always supplied when configured")
            }
        }
    }

    pub fn metrics(&self, state: &EpisodeState) -> Option<EpisodeMetrics> {
        let reason = state.done?;
        Some(EpisodeMetrics {
            total_reward: state.total_reward,
            inspected_points: state.inspected(),
            episode_length: state.step_index,
            success: reason == DoneReason::AllInspected,
            delta_v: state.cumulative_delta_v(&self.params),
            done_reason: reason,
        })
    }
}

/// First matching condition in priority order: all inspected, crash,
/// out of bounds, timeout.
pub fn check_termination(state: &EpisodeState) -> Option<DoneReason> {
    let range = state.dynamics.range();
    if state.status.all_inspected() {
        Some(DoneReason::AllInspected)
    } else if range < CRASH_DISTANCE {
        Some(DoneReason::Crash)
    } else if range > MAX_DISTANCE {
        Some(DoneReason::OutOfBounds)
    } else if state.step_index >= MAX_EPISODE_STEPS {
        Some(DoneReason::Timeout)
    } else {
        None
    }
}

/// Anything that maps observations to thrust commands.
pub trait Policy {
    fn act(&mut self, obs: &Observation) -> ThrustCommand;
}

impl<F: FnMut(&Observation) -> ThrustCommand> Policy for F {
    fn act(&mut self, obs: &Observation) -> ThrustCommand {
        self(obs)
    }
}

/// One row of a per-step episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step_index: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub reward: f64,
    pub newly_inspected: usize,
    pub inspected: usize,
    pub sun_angle: f64,
    pub done_reason: String,
}

pub const TRACE_HEADER: [&str; 15] = [
    "step_index",
    "x",
    "y",
    "z",
    "vx",
    "vy",
    "vz",
    "fx",
    "fy",
    "fz",
    "reward",
    "newly_inspected",
    "inspected",
    "sun_angle",
    "done_reason",
];

pub fn run_episode<R: Rng + ?Sized>(
    env: &InspectionEnv,
    policy: &mut dyn Policy,
    rng: &mut R,
    weights: &RewardWeightState,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<EpisodeMetrics, EnvError> {
    let (mut state, mut obs) = env.reset(rng);
    loop {
        let action = policy.act(&obs);
        let out = env.step(&mut state, &action, weights)?;
        if let Some(rows) = trace.as_deref_mut() {
            let f = action.force();
            let s = &state.dynamics;
            rows.push(TraceRow {
                step_index: state.step_index,
                x: s.position.x,
                y: s.position.y,
                z: s.position.z,
                vx: s.velocity.x,
                vy: s.velocity.y,
                vz: s.velocity.z,
                fx: f.x,
                fy: f.y,
                fz: f.z,
                reward: out.reward,
                newly_inspected: out.newly_inspected,
                inspected: state.inspected(),
                sun_angle: state.sun.angle(),
                done_reason: out.done.map(|d| d.as_str().to_string()).unwrap_or_default(),
            });
        }
        if out.done.is_some() {
            return Ok(env.metrics(&state).expect("episode is done"));
        }
        obs = out.observation;
    }
}

/// Runs `episodes` fresh episodes with the fuel weight pinned at its
/// evaluation value. Episode `i` draws its initial condition from its own
/// seed stream.
pub fn evaluate_policy(
    env: &InspectionEnv,
    policy: &mut dyn Policy,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeMetrics>, EnvError> {
    let weights = RewardWeightState::evaluation();
    (0..episodes)
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::EvalEnv, i as u64);
            run_episode(env, policy, &mut rng, &weights, None)
        })
        .collect()
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| IoError::malformed("trace", path, e))?;
    w.write_record(TRACE_HEADER)
        .map_err(|e| IoError::malformed("trace", path, e))?;
    for r in rows {
        w.write_record([
            r.step_index.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.z.to_string(),
            r.vx.to_string(),
            r.vy.to_string(),
            r.vz.to_string(),
            r.fx.to_string(),
            r.fy.to_string(),
            r.fz.to_string(),
            r.reward.to_string(),
            r.newly_inspected.to_string(),
            r.inspected.to_string(),
            r.sun_angle.to_string(),
            r.done_reason.clone(),
        ])
        .map_err(|e| IoError::malformed("trace", path, e))?;
    }
    w.flush().map_err(|e| IoError::io(path, e))?;
    Ok(())
}

pub const EVAL_HEADER: [&str; 7] = [
    "episode",
    "total_reward",
    "inspected_points",
    "episode_length",
    "success",
    "delta_v",
    "done_reason",
];

pub fn write_eval_csv(path: &Path, metrics: &[EpisodeMetrics]) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&EVAL_HEADER.join(","));
    out.push('\n');
    for (i, m) in metrics.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i,
            m.total_reward,
            m.inspected_points,
            m.episode_length,
            u8::from(m.success),
            m.delta_v,
            m.done_reason.as_str()
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| IoError::io(path, e))
}

pub fn read_eval_csv(path: &Path) -> Result<Vec<EpisodeMetrics>, IoError> {
    let mut r =
        csv::Reader::from_path(path).map_err(|e| IoError::malformed("eval csv", path, e))?;
    let headers = r
        .headers()
        .map_err(|e| IoError::malformed("eval csv", path, e))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != EVAL_HEADER {
        return Err(IoError::malformed(
            "eval csv",
            path,
            format!("unexpected header {headers:?}"),
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| IoError::malformed("eval csv", path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |e: &dyn std::fmt::Display| IoError::malformed("eval csv", path, e.to_string());
        let done_reason = match field(6) {
            "AllInspected" => DoneReason::AllInspected,
            "Crash" => DoneReason::Crash,
            "OutOfBounds" => DoneReason::OutOfBounds,
            "Timeout" => DoneReason::Timeout,
            other => return Err(bad(&format!("unknown done reason `{other}`"))),
        };
        out.push(EpisodeMetrics {
            total_reward: field(1).parse().map_err(|e| bad(&e))?,
            inspected_points: field(2).parse().map_err(|e| bad(&e))?,
            episode_length: field(3).parse().map_err(|e| bad(&e))?,
            success: field(4) == "1",
            delta_v: field(5).parse().map_err(|e| bad(&e))?,
            done_reason,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sample(radius: f64, azimuth: f64, elevation: f64, sun_angle: f64) -> InitSample {
        InitSample {
            sun_angle,
            radius,
            azimuth,
            elevation,
            speed: 0.0,
            vel_azimuth: 0.0,
            vel_elevation: 0.0,
        }
    }

    #[test]
    fn spherical_initialization_examples() {
        // sun at θ = π/2 points along −ŷ, well away from ±x̂ and ẑ boresights
        let (s, _, negated) = initial_condition(&sample(75.0, 0.0, 0.0, PI / 2.0));
        assert!(!negated);
        assert_relative_eq!(s.position, Vector3::new(75.0, 0.0, 0.0), epsilon = 1e-12);
        let (s, _, _) = initial_condition(&sample(75.0, 0.0, PI / 2.0, PI / 2.0));
        assert_relative_eq!(s.position, Vector3::new(0.0, 0.0, 75.0), epsilon = 1e-12);
    }

    #[test]
    fn boresight_toward_sun_is_negated() {
        let (s, _, negated) = initial_condition(&sample(75.0, 0.0, 0.0, PI));
        assert!(negated);
        assert_relative_eq!(s.position, Vector3::new(-75.0, 0.0, 0.0), epsilon = 1e-12);
        assert_eq!(s.velocity, Vector3::zeros());
    }

    #[test]
    fn weight_schedule_examples() {
        let w = RewardWeightState {
            w: 0.001,
            mode: WeightMode::Training,
        };
        assert_relative_eq!(w.update(0.92).w, 0.00105, epsilon = 1e-15);
        assert_eq!(w.update(0.75).w, 0.001);
        let mid = RewardWeightState {
            w: 0.05,
            mode: WeightMode::Training,
        };
        assert_eq!(mid.update(0.85).w, 0.05);
        assert_eq!(mid.update(0.90).w, 0.05);
        assert_eq!(mid.update(0.80).w, 0.05);
        let top = RewardWeightState {
            w: 0.1,
            mode: WeightMode::Training,
        };
        assert_eq!(top.update(1.0).w, 0.1);
        assert_eq!(RewardWeightState::evaluation().update(0.0).w, 0.1);
    }

    #[test]
    fn coasting_with_no_new_points_earns_nothing() {
        let env = InspectionEnv::new(ObsConfig::named("all_sensors").unwrap());
        // deputy behind the chief relative to the sun sees only dark points
        let dyn0 = HillState::new(Vector3::new(-200.0, 0.0, 0.0), Vector3::zeros());
        let (mut state, _) = env.reset_to(dyn0, SunState::new(0.0));
        let out = env
            .step(
                &mut state,
                &ThrustCommand::COAST,
                &RewardWeightState::training(),
            )
            .unwrap();
        assert_eq!(out.newly_inspected, 0);
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.done, None);
    }

    #[test]
    fn crash_step_applies_penalty() {
        let env = InspectionEnv::new(ObsConfig::named("no_sensors").unwrap());
        // moving inward fast enough to cross 15 m within one step
        let dyn0 = HillState::new(Vector3::new(0.0, 0.0, 20.0), Vector3::new(0.0, 0.0, -0.6));
        let (mut state, _) = env.reset_to(dyn0, SunState::new(PI));
        let w = RewardWeightState::training();
        let out = env.step(&mut state, &ThrustCommand::COAST, &w).unwrap();
        assert_eq!(out.done, Some(DoneReason::Crash));
        assert!(state.dynamics.range() < 15.0);
        assert_relative_eq!(
            out.reward,
            0.1 * out.newly_inspected as f64 - 1.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            env.step(&mut state, &ThrustCommand::COAST, &w),
            Err(EnvError::EpisodeDone(DoneReason::Crash))
        ));
    }

    #[test]
    fn termination_priority() {
        let env = InspectionEnv::new(ObsConfig::named("no_sensors").unwrap());
        let (mut state, _) = env.reset_to(
            HillState::new(Vector3::new(14.0, 0.0, 0.0), Vector3::zeros()),
            SunState::new(0.0),
        );
        state.status = PointStatus::from_flags(vec![true; 99]);
        assert_eq!(check_termination(&state), Some(DoneReason::AllInspected));
        state.status = PointStatus::new(99);
        assert_eq!(check_termination(&state), Some(DoneReason::Crash));
        state.dynamics.position = Vector3::new(801.0, 0.0, 0.0);
        assert_eq!(check_termination(&state), Some(DoneReason::OutOfBounds));
        state.dynamics.position = Vector3::new(100.0, 0.0, 0.0);
        let mut flags = vec![true; 99];
        flags[0] = false;
        state.status = PointStatus::from_flags(flags);
        state.step_index = 1223;
        assert_eq!(check_termination(&state), Some(DoneReason::Timeout));
        state.step_index = 1222;
        assert_eq!(check_termination(&state), None);
    }

    #[test]
    fn zero_thrust_policy_uses_no_fuel() {
        let env = InspectionEnv::new(ObsConfig::named("sun_angle_ups").unwrap());
        let mut coast = |_: &Observation| ThrustCommand::COAST;
        let metrics = evaluate_policy(&env, &mut coast, 5, 11).unwrap();
        assert_eq!(metrics.len(), 5);
        for m in &metrics {
            assert_eq!(m.delta_v, 0.0);
            assert!(m.episode_length <= MAX_EPISODE_STEPS);
        }
    }

    #[test]
    fn eval_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eval.csv");
        let metrics = vec![
            EpisodeMetrics {
                total_reward: 9.3,
                inspected_points: 99,
                episode_length: 340,
                success: true,
                delta_v: 3.25,
                done_reason: DoneReason::AllInspected,
            },
            EpisodeMetrics {
                total_reward: -0.5,
                inspected_points: 12,
                episode_length: 40,
                success: false,
                delta_v: 0.1 / 12.0 * 10.0,
                done_reason: DoneReason::Crash,
            },
        ];
        write_eval_csv(&path, &metrics).unwrap();
        assert_eq!(read_eval_csv(&path).unwrap(), metrics);
    }
}
