//! Two-stage control: a backstepping kinematic law producing velocity
//! commands, followed by an adaptive sliding mode law producing `(F, τ)`.

mod asmc;
mod kinematic;

pub use asmc::{
    adapt_gains, asmc_force, asmc_torque, baseline_asmc, baseline_adapt_gains, saturate, update_sliding,
    AdaptiveGains, AdaptiveState, AsmcConfig, ControllerKind, SlidingVars, VelocityController,
};
pub use kinematic::{
    kinematic_control, posture_error, wrap_angle, KinematicGains, Pose, PostureError, VelocityCommand,
    VelocityReference,
};
