//! Per-step episode log.

use serde::{Deserialize, Serialize};

use crate::controllers::{AdaptiveGains, ControllerKind, VelocityCommand};
use crate::vehicle::{ControlWrench, RobotState, WheelTorques};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub state: RobotState,
    pub x_ref: f64,
    pub y_ref: f64,
    pub command: VelocityCommand,
    pub wrench: ControlWrench,
    pub wheels: WheelTorques,
    pub s_v: f64,
    pub s_w: f64,
    pub gains: AdaptiveGains,
    /// `x_ref − x`.
    pub e_x: f64,
    /// `y_ref − y`.
    pub e_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    pub robots: Vec<RobotRecord>,
    /// Gap error of each consecutive pair, front pair first.
    pub gap_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub scenario: String,
    pub controller: ControllerKind,
    pub control_period: f64,
    pub n_robots: usize,
    pub records: Vec<StepRecord>,
}

impl Trace {
    pub fn new(scenario: impl Into<String>, controller: ControllerKind, control_period: f64, n_robots: usize) -> Self {
        Self {
            scenario: scenario.into(),
            controller,
            control_period,
            n_robots,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One value per record for robot `robot`.
    pub fn robot_series(&self, robot: usize, f: impl Fn(&RobotRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(|r| f(&r.robots[robot])).collect()
    }

    pub fn gap_series(&self, pair: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.gap_errors[pair]).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }
}
