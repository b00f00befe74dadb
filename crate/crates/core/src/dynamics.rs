//! Clohessy-Wiltshire relative motion with zero-order-hold thrust.
//!
//! The deputy is a point mass in the chief-centered Hill frame
//! (x radial, y in-track, z cross-track). Each control step holds a
//! constant force for `dt` seconds, so the discrete transition is the
//! exact closed-form solution of the linear dynamics rather than a
//! numerical integration.

use nalgebra::{Matrix6, SMatrix, Vector3, Vector6};

use crate::error::{ConfigError, DynamicsError};

/// Mean motion of the chief's circular orbit, rad/s.
pub const MEAN_MOTION: f64 = 0.001027;
/// Deputy mass, kg.
pub const DEPUTY_MASS: f64 = 12.0;
/// Control step duration, s.
pub const STEP_SECONDS: f64 = 10.0;
/// Magnitude of a single active thruster axis, N.
pub const THRUST_LEVEL: f64 = 0.1;

pub type InputMatrix = SMatrix<f64, 6, 3>;

/// Deputy position (m) and velocity (m/s) in Hill's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl HillState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self { position, velocity }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn from_vector(s: &Vector6<f64>) -> Self {
        Self::new(
            Vector3::new(s[0], s[1], s[2]),
            Vector3::new(s[3], s[4], s[5]),
        )
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.position.x,
            self.position.y,
            self.position.z,
            self.velocity.x,
            self.velocity.y,
            self.velocity.z,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.position
            .iter()
            .chain(self.velocity.iter())
            .all(|v| v.is_finite())
    }

    /// Distance from the chief center.
    pub fn range(&self) -> f64 {
        self.position.norm()
    }
}

/// Discrete thrust choice along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisThrust {
    Negative,
    Off,
    Positive,
}

impl AxisThrust {
    pub const ALL: [AxisThrust; 3] = [AxisThrust::Negative, AxisThrust::Off, AxisThrust::Positive];

    /// Categorical index used by the policy heads: 0 → −0.1 N, 1 → 0, 2 → +0.1 N.
    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        match self {
            AxisThrust::Negative => 0,
            AxisThrust::Off => 1,
            AxisThrust::Positive => 2,
        }
    }

    pub fn force(self) -> f64 {
        match self {
            AxisThrust::Negative => -THRUST_LEVEL,
            AxisThrust::Off => 0.0,
            AxisThrust::Positive => THRUST_LEVEL,
        }
    }
}

/// Per-axis thruster command, each component one of {−0.1, 0, +0.1} N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThrustCommand(pub [AxisThrust; 3]);

impl ThrustCommand {
    pub const COAST: ThrustCommand = ThrustCommand([AxisThrust::Off; 3]);

    pub fn from_indices(indices: [usize; 3]) -> Option<Self> {
        Some(Self([
            AxisThrust::from_index(indices[0])?,
            AxisThrust::from_index(indices[1])?,
            AxisThrust::from_index(indices[2])?,
        ]))
    }

    /// Parses a force triple; every component must be exactly −0.1, 0 or 0.1.
    pub fn from_forces(forces: [f64; 3]) -> Option<Self> {
        let axis = |f: f64| AxisThrust::ALL.into_iter().find(|a| a.force() == f);
        Some(Self([axis(forces[0])?, axis(forces[1])?, axis(forces[2])?]))
    }

    pub fn indices(&self) -> [usize; 3] {
        [self.0[0].index(), self.0[1].index(), self.0[2].index()]
    }

    pub fn force(&self) -> Vector3<f64> {
        Vector3::new(self.0[0].force(), self.0[1].force(), self.0[2].force())
    }

    /// |Fx| + |Fy| + |Fz|, summed in axis order.
    pub fn l1_norm(&self) -> f64 {
        self.0[0].force().abs() + self.0[1].force().abs() + self.0[2].force().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    mean_motion: f64,
    mass: f64,
    dt: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            mean_motion: MEAN_MOTION,
            mass: DEPUTY_MASS,
            dt: STEP_SECONDS,
        }
    }
}

impl DynamicsParams {
    pub fn new(mean_motion: f64, mass: f64, dt: f64) -> Result<Self, ConfigError> {
        for (name, v) in [("mean_motion", mean_motion), ("mass", mass), ("dt", dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            mean_motion,
            mass,
            dt,
        })
    }

    pub fn mean_motion(&self) -> f64 {
        self.mean_motion
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Zero-order-hold discretization of the CW system over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteTransition {
    pub phi: Matrix6<f64>,
    pub gamma: InputMatrix,
}

/// x − sin(x), accurate for small x where the direct difference cancels.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // x³/3! − x⁵/5! + x⁷/7! − …
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum: f64 = 0.0;
        let mut k = 3.0;
        while term.abs() > f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            term *= -x2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        sum
    } else {
        x - x.sin()
    }
}

/// 1 − cos(x) without cancellation.
fn one_minus_cos(x: f64) -> f64 {
    let h = (0.5 * x).sin();
    2.0 * h * h
}

impl DiscreteTransition {
    /// Closed-form transition over an arbitrary interval `t ≥ 0`.
    pub fn over_interval(params: &DynamicsParams, t: f64) -> Self {
        let n = params.mean_motion;
        let x = n * t;
        let (s, c) = x.sin_cos();
        let omc = one_minus_cos(x);
        let xms = x_minus_sin(x);
        let n2 = n * n;

        #[rustfmt::skip]
        let phi = Matrix6::new(
            4.0 - 3.0 * c,   0.0, 0.0,    s / n,              2.0 * omc / n,             0.0,
            -6.0 * xms,      1.0, 0.0,    -2.0 * omc / n,     (4.0 * s - 3.0 * x) / n,   0.0,
            0.0,             0.0, c,      0.0,                0.0,                       s / n,
            3.0 * n * s,     0.0, 0.0,    c,                  2.0 * s,                   0.0,
            -6.0 * n * omc,  0.0, 0.0,    -2.0 * s,           4.0 * c - 3.0,             0.0,
            0.0,             0.0, -n * s, 0.0,                0.0,                       c,
        );

        // ∫₀ᵗ Φ(τ) dτ restricted to the velocity columns, scaled by 1/m.
        let inv_m = 1.0 / params.mass;
        #[rustfmt::skip]
        let integral = InputMatrix::new(
            omc / n2,             2.0 * xms / n2,                       0.0,
            -2.0 * xms / n2,      (4.0 * omc - 1.5 * x * x) / n2,       0.0,
            0.0,                  0.0,                                  omc / n2,
            s / n,                2.0 * omc / n,                        0.0,
            -2.0 * omc / n,       (4.0 * s - 3.0 * x) / n,              0.0,
            0.0,                  0.0,                                  s / n,
        );

        Self {
            phi,
            gamma: integral * inv_m,
        }
    }
}

/// Transition for one control step of the configured duration.
pub fn build_transition(params: &DynamicsParams) -> DiscreteTransition {
    DiscreteTransition::over_interval(params, params.dt)
}

/// One ZOH step: s' = Φ s + Γ F.
pub fn propagate(
    state: &HillState,
    cmd: &ThrustCommand,
    trans: &DiscreteTransition,
) -> Result<HillState, DynamicsError> {
    let next = trans.phi * state.to_vector() + trans.gamma * cmd.force();
    let next = HillState::from_vector(&next);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(DynamicsError::Diverged)
    }
}

/// Fuel use of one step: (|Fx| + |Fy| + |Fz|) / m · Δt.
pub fn delta_v(cmd: &ThrustCommand, params: &DynamicsParams) -> f64 {
    cmd.l1_norm() / params.mass * params.dt
}

/// Cumulative fuel use from an accumulated L1 thrust sum: Δt/m · Σ|F|₁.
pub fn delta_v_from_l1_sum(l1_sum: f64, params: &DynamicsParams) -> f64 {
    params.dt / params.mass * l1_sum
}

/// The continuous-time CW matrices, used by tests and by anyone wanting to
/// integrate the dynamics directly.
pub fn continuous_system(params: &DynamicsParams) -> (Matrix6<f64>, InputMatrix) {
    let n = params.mean_motion;
    let mut a = Matrix6::zeros();
    a[(0, 3)] = 1.0;
    a[(1, 4)] = 1.0;
    a[(2, 5)] = 1.0;
    a[(3, 0)] = 3.0 * n * n;
    a[(3, 4)] = 2.0 * n;
    a[(4, 3)] = -2.0 * n;
    a[(5, 2)] = -n * n;
    let mut b = InputMatrix::zeros();
    b[(3, 0)] = 1.0 / params.mass;
    b[(4, 1)] = 1.0 / params.mass;
    b[(5, 2)] = 1.0 / params.mass;
    (a, b)
}
