//! Chief surface points, sun motion, visibility and illumination.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::dynamics::DynamicsParams;

pub const CHIEF_RADIUS: f64 = 10.0;
pub const NUM_POINTS: usize = 99;

/// Spherical chief with inspectable points at `radius * normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiefModel {
    radius: f64,
    normals: Vec<Vector3<f64>>,
}

impl Default for ChiefModel {
    fn default() -> Self {
        generate_points(NUM_POINTS, CHIEF_RADIUS)
    }
}

impl ChiefModel {
    /// Chief with an explicit point set. Normals are renormalized.
    pub fn from_normals(radius: f64, normals: Vec<Vector3<f64>>) -> Self {
        let normals = normals.into_iter().map(|n| n.normalize()).collect();
        Self { radius, normals }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Indices of points currently lit by the sun.
    pub fn illuminated_mask(&self, sun: &SunState) -> Vec<bool> {
        self.normals
            .iter()
            .map(|n| is_illuminated(n, sun))
            .collect()
    }
}

/// Golden-angle spiral on the unit sphere. For `count == 1` the single point
/// is +x̂.
pub fn generate_points(count: usize, radius: f64) -> ChiefModel {
    assert!(count >= 1, "point count must be at least 1");
    assert!(radius > 0.0, "radius must be positive");
    let golden_angle = PI * (3.0 - 5.0_f64.sqrt());
    let normals = (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let (s, c) = (golden_angle * i as f64).sin_cos();
            Vector3::new(r * c, r * s, z).normalize()
        })
        .collect();
    ChiefModel { radius, normals }
}

/// Sun angle from +x̂, positive clockwise viewed from +ẑ, kept in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunState {
    angle: f64,
}

impl SunState {
    pub fn new(angle: f64) -> Self {
        Self {
            angle: wrap_angle(angle),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn sun_direction(sun: &SunState) -> Vector3<f64> {
    let (s, c) = sun.angle.sin_cos();
    Vector3::new(c, -s, 0.0)
}

pub fn advance_sun(sun: &SunState, params: &DynamicsParams) -> SunState {
    SunState::new(sun.angle + params.mean_motion() * params.dt())
}

/// Deputy on or above the tangent plane of the point.
pub fn is_visible(point_normal: &Vector3<f64>, deputy_pos: &Vector3<f64>, radius: f64) -> bool {
    point_normal.dot(deputy_pos) >= radius
}

/// Point on the sun-facing open hemisphere.
pub fn is_illuminated(point_normal: &Vector3<f64>, sun: &SunState) -> bool {
    point_normal.dot(&sun_direction(sun)) > 0.0
}

/// Per-point inspected flags; flags only ever go from false to true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointStatus {
    inspected: Vec<bool>,
}

impl PointStatus {
    pub fn new(count: usize) -> Self {
        Self {
            inspected: vec![false; count],
        }
    }

    pub fn from_flags(inspected: Vec<bool>) -> Self {
        Self { inspected }
    }

    pub fn flags(&self) -> &[bool] {
        &self.inspected
    }

    pub fn inspected_count(&self) -> usize {
        self.inspected.iter().filter(|&&f| f).count()
    }

    pub fn uninspected_count(&self) -> usize {
        self.inspected.len() - self.inspected_count()
    }

    pub fn all_inspected(&self) -> bool {
        self.inspected.iter().all(|&f| f)
    }

    /// Marks every visible and illuminated point, returning how many flipped.
    pub fn update(
        &mut self,
        chief: &ChiefModel,
        deputy_pos: &Vector3<f64>,
        sun: &SunState,
    ) -> usize {
        let sun_dir = sun_direction(sun);
        let mut newly = 0;
        for (flag, normal) in self.inspected.iter_mut().zip(chief.normals()) {
            if !*flag
                && is_visible(normal, deputy_pos, chief.radius())
                && normal.dot(&sun_dir) > 0.0
            {
                *flag = true;
                newly += 1;
            }
        }
        newly
    }
}

/// Functional form of [`PointStatus::update`].
pub fn update_inspected(
    status: &PointStatus,
    chief: &ChiefModel,
    deputy_pos: &Vector3<f64>,
    sun: &SunState,
) -> (PointStatus, usize) {
    let mut next = status.clone();
    let newly = next.update(chief, deputy_pos, sun);
    (next, newly)
}
