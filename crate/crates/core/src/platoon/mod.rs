//! Reference generation: the shared path, predecessor-based follower
//! targeting and per-robot reference synthesis.

mod figure_eight;
mod path;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use figure_eight::{FigureEight, SampledFigureEight, TimedReference};
pub use path::Path;

use crate::controllers::{Pose, VelocityReference};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSource {
    FigureEight(FigureEight),
    /// Two-column `x y` text file.
    File { path: PathBuf, leader_start_index: usize },
}

impl Default for PathSource {
    fn default() -> Self {
        PathSource::FigureEight(FigureEight::default())
    }
}

/// How the lead robot's reference moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LeaderMode {
    /// A virtual point advancing along the path at the cruise speed.
    Timed,
    /// Nearest waypoint plus a fixed arc-length lookahead.
    Lookahead { distance: f64 },
}

/// Source of the follower's reference heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowerHeading {
    Tangent,
    Predecessor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonConfig {
    pub n_robots: usize,
    pub gap_des: f64,
    pub v_d: f64,
    /// Forward speed every robot starts with.
    pub initial_speed: f64,
    pub leader_mode: LeaderMode,
    pub follower_heading: FollowerHeading,
    pub path: PathSource,
    /// Explicit start poses; when absent robots start on the path at their
    /// targeting positions behind the leader.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_poses: Option<Vec<Pose>>,
}

impl Default for PlatoonConfig {
    fn default() -> Self {
        Self {
            n_robots: 3,
            gap_des: 1.0,
            v_d: 2.0,
            initial_speed: 0.0,
            leader_mode: LeaderMode::Timed,
            follower_heading: FollowerHeading::Tangent,
            path: PathSource::default(),
            start_poses: None,
        }
    }
}

impl PlatoonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_robots < 1 {
            return Err(Error::invalid("n_robots", "must be >= 1", self.n_robots));
        }
        ensure_positive("gap_des", self.gap_des)?;
        ensure_non_negative("v_d", self.v_d)?;
        if !self.initial_speed.is_finite() {
            return Err(Error::invalid("initial_speed", "must be finite", self.initial_speed));
        }
        if let LeaderMode::Lookahead { distance } = self.leader_mode {
            ensure_non_negative("leader_mode.lookahead.distance", distance)?;
        }
        if let PathSource::FigureEight(f) = &self.path {
            f.validate()?;
        }
        if let Some(poses) = &self.start_poses {
            if poses.len() != self.n_robots {
                return Err(Error::invalid("start_poses", "must list one pose per robot", poses.len()));
            }
        }
        Ok(())
    }
}

/// A follower's target waypoint and the reference synthesised there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerTarget {
    pub index: usize,
    pub pose: Pose,
    pub velocity: VelocityReference,
}

/// Target for a follower whose predecessor sits at `predecessor_index`.
/// Depends on nothing but that index and the shared path.
pub fn follower_target(path: &Path, predecessor_index: usize, gap_des: f64, v_d: f64) -> Result<FollowerTarget> {
    let index = path.target_waypoint(predecessor_index, gap_des)?;
    Ok(FollowerTarget {
        index,
        pose: path.reference_pose(index),
        velocity: path.reference_velocity(index, v_d),
    })
}
