//! Simulator and controller library for a leader–follower platoon of
//! differential-drive robots under spatially varying wheel friction.
//!
//! The control stack is two-stage: a backstepping kinematic law turns the
//! posture error into velocity commands, and an adaptive sliding mode law
//! turns velocity errors into force and torque. Two variants are provided:
//! the proposed law with state-dependent switching gains and a bounded-gain
//! baseline.

pub mod arena;
pub mod config;
pub mod controllers;
pub mod error;
pub mod integrate;
pub mod metrics;
pub mod platoon;
pub mod sim;
pub mod trace;
pub mod vehicle;

pub use arena::{Arena, SpeedBreaker};
pub use config::{ControllerChoice, RunConfig};
pub use controllers::{AdaptiveGains, AsmcConfig, ControllerKind, KinematicGains};
pub use error::{Error, Result};
pub use metrics::{build_report, export_trace, import_trace, rms, Comparison, RmsReport};
pub use platoon::{FigureEight, Path, PlatoonConfig};
pub use sim::{run_episode, SimConfig};
pub use trace::Trace;
pub use vehicle::{ControlWrench, RobotParams, RobotState};
