//! Run configuration: one JSON document with a section per subsystem.
//!
//! Every section rejects unknown keys, so a misspelt field is an error
//! rather than a silently ignored default.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controllers::{AsmcConfig, ControllerKind, KinematicGains};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::platoon::PlatoonConfig;
use crate::sim::SimConfig;
use crate::vehicle::RobotParams;
use crate::arena::Arena;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    /// Parameters shared by every robot.
    pub params: RobotParams,
    /// Optional per-robot override, one entry per robot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_robot: Option<Vec<RobotParams>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControllersSection {
    pub kinematic: KinematicGains,
    pub asmc: AsmcConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Samples before this time are excluded from the warm-up RMS figures.
    pub warmup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerChoice {
    Proposed,
    Baseline,
    Both,
}

impl ControllerChoice {
    pub fn kinds(self) -> &'static [ControllerKind] {
        match self {
            ControllerChoice::Proposed => &[ControllerKind::Proposed],
            ControllerChoice::Baseline => &[ControllerKind::Baseline],
            ControllerChoice::Both => &[ControllerKind::Proposed, ControllerKind::Baseline],
        }
    }
}

impl std::str::FromStr for ControllerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(ControllerChoice::Proposed),
            "baseline" => Ok(ControllerChoice::Baseline),
            "both" => Ok(ControllerChoice::Both),
            other => Err(Error::invalid("controller", "must be proposed, baseline or both", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub controller: ControllerChoice,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            controller: ControllerChoice::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub vehicle: VehicleSection,
    pub controllers: ControllersSection,
    pub platoon: PlatoonConfig,
    pub arena: Arena,
    pub sim: SimConfig,
    pub metrics: MetricsSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "figure_eight_default".into(),
            vehicle: VehicleSection {
                params: RobotParams::default(),
                per_robot: None,
            },
            controllers: ControllersSection::default(),
            platoon: PlatoonConfig::default(),
            arena: Arena::default(),
            sim: SimConfig::default(),
            metrics: MetricsSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Prefixes a field name in a validation error with its section.
fn in_section<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Invalid { field, rule, value } => Error::Invalid {
            field: format!("{section}.{field}"),
            rule,
            value,
        },
        other => other,
    })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_empty() {
            return Err(Error::invalid("scenario", "must not be empty", "\"\""));
        }
        in_section("vehicle.params", self.vehicle.params.validate())?;
        if let Some(list) = &self.vehicle.per_robot {
            if list.len() != self.platoon.n_robots {
                return Err(Error::invalid("vehicle.per_robot", "must list one entry per robot", list.len()));
            }
            for (k, p) in list.iter().enumerate() {
                in_section(&format!("vehicle.per_robot[{k}]"), p.validate())?;
            }
        }
        in_section("controllers.kinematic", self.controllers.kinematic.validate())?;
        in_section("controllers.asmc", self.controllers.asmc.validate())?;
        in_section("platoon", self.platoon.validate())?;
        in_section("arena", self.arena.validate())?;
        in_section("sim", self.sim.validate())?;
        in_section("metrics", ensure_non_negative("warmup", self.metrics.warmup))?;
        Ok(())
    }

    /// Parameters of robot `k` (0 is the leader).
    pub fn robot_params(&self, k: usize) -> RobotParams {
        match &self.vehicle.per_robot {
            Some(list) => list[k],
            None => self.vehicle.params,
        }
    }

    pub fn set_duration(&mut self, duration: f64) -> Result<()> {
        in_section("sim", ensure_non_negative("duration", duration))?;
        self.sim.duration = duration;
        Ok(())
    }

    pub fn set_dt_plant(&mut self, dt: f64) -> Result<()> {
        in_section("sim", ensure_positive("dt_plant", dt))?;
        self.sim.dt_plant = dt;
        Ok(())
    }
}
