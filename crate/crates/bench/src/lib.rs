//! Shared scenarios for the criterion benches.

use platoon_core::RunConfig;

/// Default scenario shortened to `duration` seconds.
pub fn scenario(duration: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.sim.duration = duration;
    cfg
}
