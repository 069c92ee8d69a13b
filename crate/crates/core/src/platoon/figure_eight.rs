//! Analytic figure-of-eight `(a·cos u, b·sin 2u)` and its resampling into a
//! uniformly spaced [`Path`].
//!
//! Starting from `u = 0` at `(a, 0)` the curve crosses quadrants in the order
//! 1, 3, 2, 4 and self-intersects at the origin.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::path::Path;
use crate::controllers::{Pose, VelocityReference};
use crate::error::{ensure_positive, Result};

/// Chord lengths are generated this much above the nominal spacing, so that
/// summing `n` chords never falls a rounding error short of `n · spacing`.
const CHORD_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureEight {
    /// Half-extent along x; the curve starts at `(a, 0)`.
    pub a: f64,
    /// Amplitude along y.
    pub b: f64,
    /// Waypoint spacing of the sampled path, m.
    pub spacing: f64,
}

impl Default for FigureEight {
    fn default() -> Self {
        Self {
            a: 14.0,
            b: 8.0,
            spacing: 0.05,
        }
    }
}

impl FigureEight {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("figure_eight.a", self.a)?;
        ensure_positive("figure_eight.b", self.b)?;
        ensure_positive("figure_eight.spacing", self.spacing)
    }

    pub fn position(&self, u: f64) -> (f64, f64) {
        (self.a * u.cos(), self.b * (2.0 * u).sin())
    }

    fn first(&self, u: f64) -> (f64, f64) {
        (-self.a * u.sin(), 2.0 * self.b * (2.0 * u).cos())
    }

    fn second(&self, u: f64) -> (f64, f64) {
        (-self.a * u.cos(), -4.0 * self.b * (2.0 * u).sin())
    }

    /// `|dr/du|`.
    pub fn speed(&self, u: f64) -> f64 {
        let (dx, dy) = self.first(u);
        dx.hypot(dy)
    }

    pub fn heading(&self, u: f64) -> f64 {
        let (dx, dy) = self.first(u);
        dy.atan2(dx)
    }

    /// Signed curvature, positive for left turns.
    pub fn curvature(&self, u: f64) -> f64 {
        let (dx, dy) = self.first(u);
        let (ddx, ddy) = self.second(u);
        (dx * ddy - dy * ddx) / (dx * dx + dy * dy).powf(1.5)
    }

    pub fn pose(&self, u: f64) -> Pose {
        let (x, y) = self.position(u);
        Pose::new(x, y, self.heading(u))
    }

    /// Arc length of one lap by composite Simpson quadrature.
    pub fn lap_length(&self) -> f64 {
        let n = 20_000;
        let h = TAU / n as f64;
        let mut sum = self.speed(0.0) + self.speed(TAU);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * self.speed(k as f64 * h);
        }
        sum * h / 3.0
    }

    /// Parameter after travelling `distance` metres along the curve from `u`
    /// (negative distances travel backwards). RK4 on `du/ds = 1/|r'(u)|`.
    pub fn advance(&self, u: f64, distance: f64) -> f64 {
        let max_step = 0.01;
        let n = (distance.abs() / max_step).ceil().max(1.0) as usize;
        let h = distance / n as f64;
        let rate = |u: f64| 1.0 / self.speed(u);
        let mut u = u;
        for _ in 0..n {
            let k1 = rate(u);
            let k2 = rate(u + 0.5 * h * k1);
            let k3 = rate(u + 0.5 * h * k2);
            let k4 = rate(u + h * k3);
            u += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        u
    }

    /// Next parameter (in direction `dir`) whose point lies one chord of
    /// `spacing` away from `r(u)`.
    fn next_sample(&self, u: f64, dir: f64) -> f64 {
        let target = self.spacing + CHORD_GUARD;
        let (x0, y0) = self.position(u);
        let chord = |v: f64| {
            let (x, y) = self.position(v);
            (x - x0).hypot(y - y0)
        };
        let mut hi = u + dir * 2.0 * target / self.speed(u);
        while chord(hi) < target {
            hi = u + 2.0 * (hi - u);
        }
        let mut lo = u;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if chord(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Samples the curve into a path covering `behind` metres before `u = 0`
    /// and `ahead` metres after it. Returns the path, the index of `u = 0`,
    /// and the curve parameter of every waypoint.
    pub fn sample(&self, behind: f64, ahead: f64) -> Result<SampledFigureEight> {
        self.validate()?;
        let mut back = Vec::new();
        let mut u = 0.0;
        let n_back = (behind / self.spacing).ceil() as usize;
        for _ in 0..n_back {
            u = self.next_sample(u, -1.0);
            back.push(u);
        }
        back.reverse();
        let start_index = back.len();
        let mut params = back;
        params.push(0.0);
        let n_ahead = (ahead / self.spacing).ceil() as usize;
        let mut u = 0.0;
        for _ in 0..n_ahead {
            u = self.next_sample(u, 1.0);
            params.push(u);
        }
        let path = Path::from_points(params.iter().map(|&u| self.position(u)))?;
        Ok(SampledFigureEight {
            path,
            start_index,
            params,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SampledFigureEight {
    pub path: Path,
    /// Waypoint at `u = 0`, i.e. the point `(a, 0)`.
    pub start_index: usize,
    pub params: Vec<f64>,
}

/// A reference point moving along the analytic curve at constant speed.
#[derive(Debug, Clone, Copy)]
pub struct TimedReference {
    curve: FigureEight,
    u: f64,
    speed: f64,
}

impl TimedReference {
    pub fn new(curve: FigureEight, u0: f64, speed: f64) -> Self {
        Self { curve, u: u0, speed }
    }

    pub fn pose(&self) -> Pose {
        self.curve.pose(self.u)
    }

    pub fn velocity(&self) -> VelocityReference {
        VelocityReference {
            v_d: self.speed,
            omega_d: self.curve.curvature(self.u) * self.speed,
        }
    }

    pub fn param(&self) -> f64 {
        self.u
    }

    pub fn advance(&mut self, dt: f64) {
        self.u = self.curve.advance(self.u, self.speed * dt);
    }
}
