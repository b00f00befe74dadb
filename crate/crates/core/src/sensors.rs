//! Auxiliary sensors, reference-frame transforms and observation assembly.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::HillState;
use crate::error::{ConfigError, SensorError};
use crate::geometry::{PointStatus, SunState};

pub const POSITION_SCALE: f64 = 1.0 / 100.0;
pub const VELOCITY_SCALE: f64 = 2.0;
pub const COUNT_SCALE: f64 = 1.0 / 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    ChiefCentered,
    AgentCentered,
}

/// Which sensors appear in the observation and in which frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObsConfig {
    pub use_count: bool,
    pub use_sun: bool,
    pub use_ups: bool,
    pub pose_frame: Frame,
    pub ups_frame: Frame,
}

/// Registered configuration names, in report order.
pub const CONFIG_NAMES: [&str; 12] = [
    "no_sensors",
    "count",
    "sun_angle",
    "ups",
    "count_sun_angle",
    "count_ups",
    "sun_angle_ups",
    "all_sensors",
    "frame_all_chief",
    "frame_agent_pose",
    "frame_agent_ups",
    "frame_all_agent",
];

impl ObsConfig {
    pub const fn sensors(use_count: bool, use_sun: bool, use_ups: bool) -> Self {
        Self {
            use_count,
            use_sun,
            use_ups,
            pose_frame: Frame::ChiefCentered,
            ups_frame: Frame::ChiefCentered,
        }
    }

    pub const fn frames(pose_frame: Frame, ups_frame: Frame) -> Self {
        Self {
            use_count: false,
            use_sun: true,
            use_ups: true,
            pose_frame,
            ups_frame,
        }
    }

    pub fn named(name: &str) -> Result<Self, ConfigError> {
        use Frame::*;
        let cfg = match name {
            "no_sensors" => Self::sensors(false, false, false),
            "count" => Self::sensors(true, false, false),
            "sun_angle" => Self::sensors(false, true, false),
            "ups" => Self::sensors(false, false, true),
            "count_sun_angle" => Self::sensors(true, true, false),
            "count_ups" => Self::sensors(true, false, true),
            "sun_angle_ups" => Self::sensors(false, true, true),
            "all_sensors" => Self::sensors(true, true, true),
            "frame_all_chief" => Self::frames(ChiefCentered, ChiefCentered),
            "frame_agent_pose" => Self::frames(AgentCentered, ChiefCentered),
            "frame_agent_ups" => Self::frames(ChiefCentered, AgentCentered),
            "frame_all_agent" => Self::frames(AgentCentered, AgentCentered),
            _ => {
                return Err(ConfigError::UnknownObsConfig {
                    name: name.to_string(),
                    valid: CONFIG_NAMES.join(", "),
                })
            }
        };
        Ok(cfg)
    }

    pub fn obs_len(&self) -> usize {
        6 + usize::from(self.use_count) + usize::from(self.use_sun) + 3 * usize::from(self.use_ups)
    }

    pub fn layout(&self) -> Vec<Segment> {
        let mut layout = vec![Segment::Position, Segment::Velocity];
        if self.use_count {
            layout.push(Segment::Count);
        }
        if self.use_sun {
            layout.push(Segment::SunAngle);
        }
        if self.use_ups {
            layout.push(Segment::Ups);
        }
        layout
    }
}

/// Row label used in aggregate tables for a registered config name.
pub fn display_label(name: &str) -> Option<&'static str> {
    Some(match name {
        "no_sensors" => "No Sensors",
        "count" => "Count",
        "sun_angle" => "Sun Angle",
        "ups" => "UPS",
        "count_sun_angle" => "Count and Sun Angle",
        "count_ups" => "Count and UPS",
        "sun_angle_ups" => "Sun Angle and UPS",
        "all_sensors" => "All Sensors (baseline)",
        "frame_all_chief" => "All Chief-Centered",
        "frame_agent_pose" => "Agent-Centered Pose",
        "frame_agent_ups" => "Agent-Centered UPS",
        "frame_all_agent" => "All Agent-Centered",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Position,
    Velocity,
    Count,
    SunAngle,
    Ups,
}

impl Segment {
    pub fn width(self) -> usize {
        match self {
            Segment::Position | Segment::Velocity | Segment::Ups => 3,
            Segment::Count | Segment::SunAngle => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Segment::Position => "position",
            Segment::Velocity => "velocity",
            Segment::Count => "count",
            Segment::SunAngle => "sun_angle",
            Segment::Ups => "ups",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    pub layout: Vec<Segment>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Slice of the given segment, if present.
    pub fn segment(&self, which: Segment) -> Option<&[f64]> {
        let mut offset = 0;
        for seg in &self.layout {
            if *seg == which {
                return Some(&self.values[offset..offset + seg.width()]);
            }
            offset += seg.width();
        }
        None
    }
}

pub fn count_sensor(status: &PointStatus) -> f64 {
    status.inspected_count() as f64 * COUNT_SCALE
}

/// Raw sun angle; identical in both frames.
pub fn sun_sensor(sun: &SunState) -> f64 {
    sun.angle()
}

/// Chief position and velocity as seen from the deputy.
pub fn to_agent_centered_pose(state: &HillState) -> HillState {
    HillState::new(-state.position, -state.velocity)
}

/// Direction from the deputy to the cluster surface point `radius * ups_chief`.
pub fn to_agent_centered_ups(
    ups_chief: &Vector3<f64>,
    deputy_pos: &Vector3<f64>,
    radius: f64,
) -> Result<Vector3<f64>, SensorError> {
    (ups_chief * radius - deputy_pos)
        .try_normalize(0.0)
        .ok_or(SensorError::DegenerateDirection)
}

/// Builds the normalized observation vector. `ups_chief` must be given when
/// the config uses the UPS; it is expressed in the chief frame and converted
/// here if the config asks for the agent frame.
pub fn assemble(
    config: &ObsConfig,
    state: &HillState,
    status: &PointStatus,
    sun: &SunState,
    ups_chief: Option<&Vector3<f64>>,
    chief_radius: f64,
) -> Result<Observation, SensorError> {
    let pose = match config.pose_frame {
        Frame::ChiefCentered => *state,
        Frame::AgentCentered => to_agent_centered_pose(state),
    };
    let mut values = Vec::with_capacity(config.obs_len());
    values.extend(pose.position.iter().map(|p| p * POSITION_SCALE));
    values.extend(pose.velocity.iter().map(|v| v * VELOCITY_SCALE));
    if config.use_count {
        values.push(count_sensor(status));
    }
    if config.use_sun {
        values.push(sun_sensor(sun));
    }
    if config.use_ups {
        let ups = ups_chief.ok_or(SensorError::MissingUps)?;
        let ups = match config.ups_frame {
            Frame::ChiefCentered => *ups,
            Frame::AgentCentered => to_agent_centered_ups(ups, &state.position, chief_radius)?,
        };
        values.extend(ups.iter());
    }
    Ok(Observation {
        values,
        layout: config.layout(),
    })
}
