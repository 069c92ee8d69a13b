//! Differential-drive plant: kinematics, force/torque dynamics with
//! Coulomb plus viscous wheel friction, and the wheel torque map.
//!
//! Wheel contact speeds use `v_r = v + ωL/2`, `v_l = v − ωL/2`, with `L` the
//! half-width. Frictional yaw torque is `(f_r − f_l)·L`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::integrate::OdeState;

/// Velocity scale of the smoothed Coulomb sign, m/s.
pub const COULOMB_SMOOTHING: f64 = 0.01;

/// Smooth sign `tanh(x / eps)`; zero at rest, saturates at ±1.
pub fn smooth_sign(x: f64, eps: f64) -> f64 {
    (x / eps).tanh()
}

/// Physical parameters of one robot. Ground truth for the plant only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    /// Mass, kg.
    pub m: f64,
    /// Yaw inertia, kg·m².
    pub j: f64,
    /// Wheel radius, m.
    pub r: f64,
    /// Half-width, m.
    pub l: f64,
    /// Coulomb friction magnitude, right wheel, N.
    pub f_kr: f64,
    /// Coulomb friction magnitude, left wheel, N.
    pub f_kl: f64,
    /// Viscous coefficient, right wheel, N·s/m.
    pub f_cr: f64,
    /// Viscous coefficient, left wheel, N·s/m.
    pub f_cl: f64,
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("m", self.m)?;
        ensure_positive("j", self.j)?;
        ensure_positive("r", self.r)?;
        ensure_positive("l", self.l)?;
        ensure_non_negative("f_kr", self.f_kr)?;
        ensure_non_negative("f_kl", self.f_kl)?;
        ensure_non_negative("f_cr", self.f_cr)?;
        ensure_non_negative("f_cl", self.f_cl)
    }

    /// Same robot with all four friction coefficients multiplied by `scale`.
    pub fn with_friction_scale(&self, scale: f64) -> Self {
        Self {
            f_kr: self.f_kr * scale,
            f_kl: self.f_kl * scale,
            f_cr: self.f_cr * scale,
            f_cl: self.f_cl * scale,
            ..*self
        }
    }

    pub fn frictionless(&self) -> Self {
        self.with_friction_scale(0.0)
    }
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            j: 0.05,
            r: 0.033,
            l: 0.144,
            f_kr: 0.3,
            f_kl: 0.3,
            f_cr: 0.5,
            f_cl: 0.5,
        }
    }
}

/// Pose and body velocities. `theta` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

impl RobotState {
    pub fn at_pose(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta,
            ..Self::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.v, self.omega]
            .iter()
            .all(|c| c.is_finite())
    }

    pub fn kinetic_energy(&self, params: &RobotParams) -> f64 {
        0.5 * params.m * self.v * self.v + 0.5 * params.j * self.omega * self.omega
    }
}

impl OdeState for RobotState {
    fn add_scaled(self, h: f64, rate: Self) -> Self {
        Self {
            x: self.x + h * rate.x,
            y: self.y + h * rate.y,
            theta: self.theta + h * rate.theta,
            v: self.v + h * rate.v,
            omega: self.omega + h * rate.omega,
        }
    }
}

/// Longitudinal force and yaw torque command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlWrench {
    pub force: f64,
    pub torque: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelTorques {
    pub right: f64,
    pub left: f64,
}

/// Linear speeds of the wheel contact points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelSpeeds {
    pub right: f64,
    pub left: f64,
}

pub fn wheel_speeds(state: &RobotState, params: &RobotParams) -> WheelSpeeds {
    let half = 0.5 * state.omega * params.l;
    WheelSpeeds {
        right: state.v + half,
        left: state.v - half,
    }
}

/// Frictional force `f_v` (N) and torque `f_w` (N·m).
pub fn friction_forces(state: &RobotState, params: &RobotParams) -> (f64, f64) {
    let ws = wheel_speeds(state, params);
    let right = params.f_kr * smooth_sign(ws.right, COULOMB_SMOOTHING) + params.f_cr * ws.right;
    let left = params.f_kl * smooth_sign(ws.left, COULOMB_SMOOTHING) + params.f_cl * ws.left;
    (right + left, (right - left) * params.l)
}

/// Time derivative of the plant. The returned `RobotState` holds rates.
///
/// `d_v` and `d_w` are external disturbances opposing `F` and `τ`.
pub fn plant_derivative(
    state: &RobotState,
    wrench: &ControlWrench,
    d_v: f64,
    d_w: f64,
    params: &RobotParams,
) -> Result<RobotState> {
    if !state.is_finite() {
        return Err(Error::NonFinite("plant state"));
    }
    if !(wrench.force.is_finite() && wrench.torque.is_finite()) {
        return Err(Error::NonFinite("control wrench"));
    }
    if !(d_v.is_finite() && d_w.is_finite()) {
        return Err(Error::NonFinite("disturbance"));
    }
    let (f_v, f_w) = friction_forces(state, params);
    let (sin, cos) = state.theta.sin_cos();
    Ok(RobotState {
        x: state.v * cos,
        y: state.v * sin,
        theta: state.omega,
        v: (wrench.force - f_v - d_v) / params.m,
        omega: (wrench.torque - f_w - d_w) / params.j,
    })
}

/// Splits `(F, τ)` into per-wheel torques; inverse of [`wrench_from_wheels`].
pub fn wheel_torque_split(wrench: &ControlWrench, params: &RobotParams) -> WheelTorques {
    let yaw = wrench.torque / params.l;
    WheelTorques {
        right: 0.5 * params.r * (wrench.force + yaw),
        left: 0.5 * params.r * (wrench.force - yaw),
    }
}

/// `F = (τ_r + τ_l)/R`, `τ = (τ_r − τ_l)·L/R`.
pub fn wrench_from_wheels(wheels: &WheelTorques, params: &RobotParams) -> ControlWrench {
    ControlWrench {
        force: (wheels.right + wheels.left) / params.r,
        torque: (wheels.right - wheels.left) * params.l / params.r,
    }
}
