//! Closed-loop episode engine.
//!
//! Each control period, robots are updated lead first: path index, target,
//! posture error, kinematic command, sliding/adaptive update, wrench and
//! wheel split. The plant is then advanced by RK4 at `dt_plant` with the
//! wrench held over the period.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::config::RunConfig;
use crate::controllers::{
    kinematic_control, posture_error, ControllerKind, KinematicGains, Pose, PostureError, VelocityCommand,
    VelocityController, VelocityReference,
};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::integrate::rk4_step;
use crate::platoon::{follower_target, FigureEight, FollowerHeading, LeaderMode, Path, PathSource, TimedReference};
use crate::trace::{RobotRecord, StepRecord, Trace};
use crate::vehicle::{plant_derivative, wheel_torque_split, wrench_from_wheels, ControlWrench, RobotParams, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt_plant: f64,
    pub control_period: f64,
    pub duration: f64,
    /// Seed for breaker amplitude jitter.
    pub seed: u64,
    /// Relative breaker amplitude jitter in `[0, 1)`; zero draws nothing.
    pub breaker_jitter: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_plant: 1e-3,
            control_period: 1e-2,
            duration: 600.0,
            seed: 0,
            breaker_jitter: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("dt_plant", self.dt_plant)?;
        ensure_positive("control_period", self.control_period)?;
        ensure_non_negative("duration", self.duration)?;
        if self.dt_plant > self.control_period {
            return Err(Error::invalid("dt_plant", "must not exceed control_period", self.dt_plant));
        }
        let ratio = self.control_period / self.dt_plant;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio {
            return Err(Error::invalid("dt_plant", "must divide control_period evenly", self.dt_plant));
        }
        if !(0.0..1.0).contains(&self.breaker_jitter) {
            return Err(Error::invalid("breaker_jitter", "must lie in [0, 1)", self.breaker_jitter));
        }
        Ok(())
    }

    pub fn substeps(&self) -> usize {
        (self.control_period / self.dt_plant).round() as usize
    }

    pub fn control_steps(&self) -> usize {
        (self.duration / self.control_period).round() as usize
    }
}

/// One RK4 step of a single robot inside the arena under a held wrench.
///
/// Friction scaling and breaker disturbances are re-evaluated at every stage.
pub fn integrate_plant(
    state: &RobotState,
    wrench: &ControlWrench,
    params: &RobotParams,
    arena: Option<&Arena>,
    disturbance_scale: f64,
    dt: f64,
) -> Result<RobotState> {
    rk4_step(*state, dt, |s| match arena {
        Some(arena) => {
            let p = params.with_friction_scale(arena.friction_scale_at(s.x, s.y));
            let (d_v, d_w) = arena.breaker_disturbance(&s);
            plant_derivative(&s, wrench, d_v * disturbance_scale, d_w * disturbance_scale, &p)
        }
        None => plant_derivative(&s, wrench, 0.0, 0.0, params),
    })
}

enum LeaderReference {
    Curve(TimedReference),
    Polyline { arc: f64, speed: f64 },
    Lookahead { distance: f64, speed: f64 },
}

/// Shared path plus the waypoint index the lead robot starts at.
pub struct PathSetup {
    pub path: Path,
    pub leader_start_index: usize,
    pub curve: Option<FigureEight>,
}

impl PathSetup {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let platoon = &cfg.platoon;
        match &platoon.path {
            PathSource::FigureEight(curve) => {
                let lookahead = match platoon.leader_mode {
                    LeaderMode::Lookahead { distance } => distance,
                    LeaderMode::Timed => 0.0,
                };
                let behind = platoon.gap_des * platoon.n_robots as f64 + 5.0;
                let ahead = 1.25 * platoon.v_d * cfg.sim.duration + lookahead + 20.0;
                let sampled = curve.sample(behind, ahead)?;
                Ok(Self {
                    path: sampled.path,
                    leader_start_index: sampled.start_index,
                    curve: Some(*curve),
                })
            }
            PathSource::File { path, leader_start_index } => {
                let p = Path::load(path)?;
                if *leader_start_index >= p.len() {
                    return Err(Error::invalid(
                        "platoon.path.file.leader_start_index",
                        "must lie inside the path",
                        leader_start_index,
                    ));
                }
                Ok(Self {
                    path: p,
                    leader_start_index: *leader_start_index,
                    curve: None,
                })
            }
        }
    }

    /// Search half-window for nearest-index tracking, in waypoints.
    fn window(&self) -> usize {
        let mean = self.path.total_length() / (self.path.len() - 1) as f64;
        ((5.0 / mean).ceil() as usize).max(10)
    }
}

struct Robot {
    params: RobotParams,
    state: RobotState,
    index: usize,
    controller: VelocityController,
    wrench: ControlWrench,
}

/// Runs one episode of `kind` on the scenario in `cfg`.
///
/// Identical inputs produce bit-identical traces.
pub fn run_episode(cfg: &RunConfig, kind: ControllerKind) -> Result<Trace> {
    cfg.validate()?;
    let setup = PathSetup::from_config(cfg)?;
    run_episode_on(cfg, kind, &setup)
}

/// As [`run_episode`] with a prepared path.
pub fn run_episode_on(cfg: &RunConfig, kind: ControllerKind, setup: &PathSetup) -> Result<Trace> {
    let platoon = &cfg.platoon;
    let sim = &cfg.sim;
    let path = &setup.path;
    let kin = &cfg.controllers.kinematic;
    let n = platoon.n_robots;
    let window = setup.window();
    let tc = sim.control_period;

    let mut leader_ref = match (platoon.leader_mode, setup.curve) {
        (LeaderMode::Timed, Some(curve)) => LeaderReference::Curve(TimedReference::new(curve, 0.0, platoon.v_d)),
        (LeaderMode::Timed, None) => LeaderReference::Polyline {
            arc: path.arc_at(setup.leader_start_index),
            speed: platoon.v_d,
        },
        (LeaderMode::Lookahead { distance }, _) => LeaderReference::Lookahead {
            distance,
            speed: platoon.v_d,
        },
    };

    let mut robots = Vec::with_capacity(n);
    let mut index = setup.leader_start_index;
    for k in 0..n {
        if k > 0 {
            index = path.target_waypoint(index, platoon.gap_des)?;
        }
        let (pose, idx) = match &platoon.start_poses {
            Some(poses) => (poses[k], path.nearest_index(poses[k].x, poses[k].y)),
            None if k == 0 => match &leader_ref {
                LeaderReference::Curve(r) => (r.pose(), index),
                _ => (path.reference_pose(index), index),
            },
            None => (path.reference_pose(index), index),
        };
        robots.push(Robot {
            params: cfg.robot_params(k),
            state: RobotState {
                v: platoon.initial_speed,
                ..RobotState::at_pose(pose.x, pose.y, pose.theta)
            },
            index: idx,
            controller: VelocityController::new(kind, cfg.controllers.asmc),
            wrench: ControlWrench::default(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut trace = Trace::new(cfg.scenario.clone(), kind, tc, n);
    let steps = sim.control_steps();
    let substeps = sim.substeps();

    for step in 0..=steps {
        let time = step as f64 * tc;
        let mut records = Vec::with_capacity(n);
        for k in 0..n {
            let x = robots[k].state.x;
            let y = robots[k].state.y;
            let idx = path.nearest_index_near(x, y, robots[k].index, window);
            robots[k].index = idx;

            let (reference, vel) = if k == 0 {
                match &leader_ref {
                    LeaderReference::Curve(r) => (r.pose(), r.velocity()),
                    LeaderReference::Polyline { arc, speed } => {
                        let (pose, kappa) = path.sample_at_arc(*arc);
                        (pose, VelocityReference { v_d: *speed, omega_d: kappa * speed })
                    }
                    LeaderReference::Lookahead { distance, speed } => {
                        let i = path.index_ahead(idx, *distance);
                        (path.reference_pose(i), path.reference_velocity(i, *speed))
                    }
                }
            } else {
                let t = follower_target(path, robots[k - 1].index, platoon.gap_des, platoon.v_d)?;
                let mut pose = t.pose;
                if platoon.follower_heading == FollowerHeading::Predecessor {
                    pose.theta = robots[k - 1].state.theta;
                }
                (pose, t.velocity)
            };

            let robot = &mut robots[k];
            let err = posture_error(&robot.state, &reference);
            let cmd = kinematic_control(&err, &vel, kin);
            let (sv, gains, wrench) = robot.controller.step(robot.state.v, robot.state.omega, &cmd, tc);
            let wheels = wheel_torque_split(&wrench, &robot.params);
            robot.wrench = wrench_from_wheels(&wheels, &robot.params);
            records.push(RobotRecord {
                state: robot.state,
                x_ref: reference.x,
                y_ref: reference.y,
                command: cmd,
                wrench,
                wheels,
                s_v: sv.s_v,
                s_w: sv.s_w,
                gains,
                e_x: reference.x - robot.state.x,
                e_y: reference.y - robot.state.y,
            });
        }
        let gap_errors = (1..n)
            .map(|k| path.gap_error(robots[k - 1].index, robots[k].index, platoon.gap_des))
            .collect();
        trace.records.push(StepRecord {
            time,
            robots: records,
            gap_errors,
        });

        if step == steps {
            break;
        }
        for (k, robot) in robots.iter_mut().enumerate() {
            let scale = if sim.breaker_jitter > 0.0 {
                1.0 + sim.breaker_jitter * rng.gen_range(-1.0..1.0)
            } else {
                1.0
            };
            let mut state = robot.state;
            for _ in 0..substeps {
                state = match integrate_plant(&state, &robot.wrench, &robot.params, Some(&cfg.arena), scale, sim.dt_plant) {
                    Ok(s) if s.is_finite() => s,
                    _ => {
                        return Err(Error::Aborted {
                            time,
                            robot: k,
                            trace: Box::new(trace),
                        })
                    }
                };
            }
            robot.state = state;
        }
        match &mut leader_ref {
            LeaderReference::Curve(r) => r.advance(tc),
            LeaderReference::Polyline { arc, speed } => *arc += *speed * tc,
            LeaderReference::Lookahead { .. } => {}
        }
    }
    Ok(trace)
}

/// Kinematic loop with dynamics bypassed: `(v_c, ω_c)` drives the kinematic
/// model directly. The reference is the analytic curve traversed at `v_d`
/// from `u = 0`; the robot starts displaced from it by `offset`.
///
/// Returns the posture error at every control instant.
pub fn kinematic_loop(
    curve: &FigureEight,
    gains: &KinematicGains,
    v_d: f64,
    offset: Pose,
    control_period: f64,
    substeps: usize,
    duration: f64,
) -> Vec<(f64, PostureError)> {
    let mut reference = TimedReference::new(*curve, 0.0, v_d);
    let start = reference.pose();
    let mut q = [start.x + offset.x, start.y + offset.y, start.theta + offset.theta];
    let steps = (duration / control_period).round() as usize;
    let h = control_period / substeps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let state = RobotState::at_pose(q[0], q[1], q[2]);
        let err = posture_error(&state, &reference.pose());
        out.push((step as f64 * control_period, err));
        if step == steps {
            break;
        }
        let VelocityCommand { v_c, omega_c } = kinematic_control(&err, &reference.velocity(), gains);
        for _ in 0..substeps {
            q = rk4_step(q, h, |[_, _, th]| Ok::<_, std::convert::Infallible>([v_c * th.cos(), v_c * th.sin(), omega_c]))
                .expect("infallible");
        }
        reference.advance(control_period);
    }
    out
}
