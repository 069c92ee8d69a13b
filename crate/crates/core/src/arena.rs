//! Spatial friction field and speed-breaker disturbances.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::vehicle::{smooth_sign, RobotState, COULOMB_SMOOTHING};

/// A disc-shaped bump region that pushes back on any robot inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedBreaker {
    pub center: [f64; 2],
    pub half_width: f64,
    /// Longitudinal disturbance magnitude, N; opposes the direction of travel.
    pub force: f64,
    /// Yaw disturbance, N·m.
    pub torque: f64,
}

impl SpeedBreaker {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.center[0]).hypot(y - self.center[1]) <= self.half_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    /// Longitudinal surface friction of quadrants 1 to 4. Quadrant 1 is the
    /// reference surface the robot coefficients are specified on.
    pub quadrant_mu: [f64; 4],
    /// Recorded only; lateral slip is not modelled.
    pub mu_lateral: f64,
    pub speed_breakers: Vec<SpeedBreaker>,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            quadrant_mu: [0.1, 0.1, 0.13, 0.1],
            mu_lateral: 0.1,
            speed_breakers: vec![
                SpeedBreaker {
                    center: [10.708, 7.884],
                    half_width: 0.3,
                    force: 2.0,
                    torque: 0.2,
                },
                SpeedBreaker {
                    center: [10.858, -7.833],
                    half_width: 0.3,
                    force: 2.0,
                    torque: 0.2,
                },
            ],
        }
    }
}

/// Quadrant number under the half-open convention: x ≥ 0, y ≥ 0 is Q1.
pub fn quadrant(x: f64, y: f64) -> usize {
    match (x >= 0.0, y >= 0.0) {
        (true, true) => 1,
        (false, true) => 2,
        (false, false) => 3,
        (true, false) => 4,
    }
}

impl Arena {
    pub fn validate(&self) -> Result<()> {
        for (q, mu) in self.quadrant_mu.iter().enumerate() {
            ensure_positive(&format!("quadrant_mu[{q}]"), *mu)?;
        }
        ensure_positive("mu_lateral", self.mu_lateral)?;
        for (k, b) in self.speed_breakers.iter().enumerate() {
            ensure_positive(&format!("speed_breakers[{k}].half_width"), b.half_width)?;
            if !(b.force.is_finite() && b.torque.is_finite() && b.center.iter().all(|c| c.is_finite())) {
                return Err(Error::invalid(format!("speed_breakers[{k}]"), "must be finite", "non-finite"));
            }
        }
        Ok(())
    }

    /// Friction multiplier at `(x, y)` relative to quadrant 1.
    pub fn friction_scale_at(&self, x: f64, y: f64) -> f64 {
        self.quadrant_mu[quadrant(x, y) - 1] / self.quadrant_mu[0]
    }

    /// `(d_v, d_w)` summed over every breaker containing the robot.
    pub fn breaker_disturbance(&self, state: &RobotState) -> (f64, f64) {
        self.speed_breakers
            .iter()
            .filter(|b| b.contains(state.x, state.y))
            .fold((0.0, 0.0), |(dv, dw), b| {
                (dv + b.force * smooth_sign(state.v, COULOMB_SMOOTHING), dw + b.torque)
            })
    }
}
