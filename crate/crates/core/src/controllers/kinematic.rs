use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};
use crate::vehicle::RobotState;

/// Planar pose `(x, y, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicGains {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl KinematicGains {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("k1", self.k1)?;
        ensure_positive("k2", self.k2)?;
        ensure_positive("k3", self.k3)
    }
}

impl Default for KinematicGains {
    fn default() -> Self {
        Self {
            k1: 5.0,
            k2: 3.0,
            k3: 2.0,
        }
    }
}

/// Body-frame posture error; `e3` lies in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PostureError {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl PostureError {
    pub fn max_abs(&self) -> f64 {
        self.e1.abs().max(self.e2.abs()).max(self.e3.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityReference {
    pub v_d: f64,
    pub omega_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub v_c: f64,
    pub omega_c: f64,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle - TAU * ((angle + PI) / TAU).floor();
    // floor maps exactly +π to −π; keep the upper end closed.
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

pub fn posture_error(state: &RobotState, reference: &Pose) -> PostureError {
    let (sin, cos) = state.theta.sin_cos();
    let dx = reference.x - state.x;
    let dy = reference.y - state.y;
    PostureError {
        e1: cos * dx + sin * dy,
        e2: -sin * dx + cos * dy,
        e3: wrap_angle(reference.theta - state.theta),
    }
}

pub fn kinematic_control(err: &PostureError, reference: &VelocityReference, gains: &KinematicGains) -> VelocityCommand {
    let v_d = reference.v_d;
    VelocityCommand {
        v_c: v_d * err.e3.cos() + gains.k1 * err.e1,
        omega_c: reference.omega_d + gains.k2 * v_d * err.e2 + gains.k3 * v_d * err.e3.sin(),
    }
}
