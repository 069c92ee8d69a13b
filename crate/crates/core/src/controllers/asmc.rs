//! Adaptive sliding mode velocity tracking.
//!
//! The proposed law carries state-dependent switching gains
//! `ρ_v = K̂_v0 + K̂_v1‖ξ_v‖ + K̂_w2‖ξ_ω‖` and
//! `ρ_ω = K̂_w0 + K̂_w1‖ξ_ω‖ + K̂_v2‖ξ_v‖`, each gain driven by a
//! leakage adaptive law. The baseline keeps only `K̂_v0` and `K̂_w0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::kinematic::VelocityCommand;
use crate::error::{ensure_positive, Error, Result};
use crate::vehicle::ControlWrench;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Proposed,
    Baseline,
}

impl ControllerKind {
    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::Proposed => "proposed",
            ControllerKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(ControllerKind::Proposed),
            "baseline" => Ok(ControllerKind::Baseline),
            other => Err(Error::invalid("controller", "must be `proposed` or `baseline`", other)),
        }
    }
}

/// The six adaptive gain estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveGains {
    pub k_v0: f64,
    pub k_v1: f64,
    pub k_w2: f64,
    pub k_w0: f64,
    pub k_w1: f64,
    pub k_v2: f64,
}

impl AdaptiveGains {
    pub fn uniform(value: f64) -> Self {
        Self {
            k_v0: value,
            k_v1: value,
            k_w2: value,
            k_w0: value,
            k_w1: value,
            k_v2: value,
        }
    }

    /// Gains in trace column order.
    pub fn as_array(&self) -> [f64; 6] {
        [self.k_v0, self.k_v1, self.k_w2, self.k_w0, self.k_w1, self.k_v2]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            k_v0: a[0],
            k_v1: a[1],
            k_w2: a[2],
            k_w0: a[3],
            k_w1: a[4],
            k_v2: a[5],
        }
    }

    pub fn all_positive(&self) -> bool {
        self.as_array().iter().all(|&k| k > 0.0)
    }
}

impl Default for AdaptiveGains {
    fn default() -> Self {
        Self::uniform(0.01)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsmcConfig {
    pub phi_v: f64,
    pub phi_w: f64,
    pub lambda_v: f64,
    pub lambda_w: f64,
    pub alpha_v0: f64,
    pub alpha_v1: f64,
    pub alpha_w2: f64,
    pub alpha_w0: f64,
    pub alpha_w1: f64,
    pub alpha_v2: f64,
    /// Boundary-layer width of the saturation replacing `sgn`.
    pub epsilon_bl: f64,
    pub initial_gains: AdaptiveGains,
    /// Upper clamp on every gain; `None` disables it.
    pub gain_clamp: Option<f64>,
}

impl Default for AsmcConfig {
    fn default() -> Self {
        Self {
            phi_v: 0.5,
            phi_w: 0.1,
            lambda_v: 3.0,
            lambda_w: 2.0,
            alpha_v0: 2.5,
            alpha_v1: 2.5,
            alpha_w2: 3.0,
            alpha_w0: 5.0,
            alpha_w1: 5.0,
            alpha_v2: 1.5,
            epsilon_bl: 0.05,
            initial_gains: AdaptiveGains::default(),
            gain_clamp: Some(1e4),
        }
    }
}

impl AsmcConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("phi_v", self.phi_v),
            ("phi_w", self.phi_w),
            ("lambda_v", self.lambda_v),
            ("lambda_w", self.lambda_w),
            ("alpha_v0", self.alpha_v0),
            ("alpha_v1", self.alpha_v1),
            ("alpha_w2", self.alpha_w2),
            ("alpha_w0", self.alpha_w0),
            ("alpha_w1", self.alpha_w1),
            ("alpha_v2", self.alpha_v2),
            ("epsilon_bl", self.epsilon_bl),
        ];
        for (name, value) in fields {
            ensure_positive(name, value)?;
        }
        const GAIN_NAMES: [&str; 6] = ["k_v0", "k_v1", "k_w2", "k_w0", "k_w1", "k_v2"];
        for (name, value) in GAIN_NAMES.iter().zip(self.initial_gains.as_array()) {
            ensure_positive(&format!("initial_gains.{name}"), value)?;
        }
        if let Some(clamp) = self.gain_clamp {
            ensure_positive("gain_clamp", clamp)?;
        }
        Ok(())
    }
}

/// Adaptive gains plus the running velocity-error integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub gains: AdaptiveGains,
    pub int_ev: f64,
    pub int_ew: f64,
}

impl AdaptiveState {
    pub fn new(gains: AdaptiveGains) -> Self {
        Self {
            gains,
            int_ev: 0.0,
            int_ew: 0.0,
        }
    }
}

/// Sliding quantities at one control instant.
///
/// `s_v == e_v + phi_v * int_ev` holds exactly for the stored integral.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlidingVars {
    pub s_v: f64,
    pub s_w: f64,
    pub e_v: f64,
    pub e_w: f64,
    pub int_ev: f64,
    pub int_ew: f64,
    pub xi_v_norm: f64,
    pub xi_w_norm: f64,
}

/// Forms the sliding variables from the integrals accumulated up to now,
/// then advances the integrals one explicit Euler step of length `dt`.
pub fn update_sliding(
    adaptive: &mut AdaptiveState,
    v: f64,
    omega: f64,
    cmd: &VelocityCommand,
    cfg: &AsmcConfig,
    dt: f64,
) -> SlidingVars {
    let e_v = v - cmd.v_c;
    let e_w = omega - cmd.omega_c;
    let (int_ev, int_ew) = (adaptive.int_ev, adaptive.int_ew);
    adaptive.int_ev += e_v * dt;
    adaptive.int_ew += e_w * dt;
    SlidingVars {
        s_v: e_v + cfg.phi_v * int_ev,
        s_w: e_w + cfg.phi_w * int_ew,
        e_v,
        e_w,
        int_ev,
        int_ew,
        xi_v_norm: e_v.hypot(int_ev),
        xi_w_norm: e_w.hypot(int_ew),
    }
}

/// Boundary-layer replacement for `sgn(s)`.
pub fn saturate(s: f64, width: f64) -> f64 {
    (s / width).clamp(-1.0, 1.0)
}

pub fn asmc_force(sv: &SlidingVars, gains: &AdaptiveGains, cfg: &AsmcConfig) -> f64 {
    let rho = gains.k_v0 + gains.k_v1 * sv.xi_v_norm + gains.k_w2 * sv.xi_w_norm;
    -cfg.lambda_v * sv.s_v - rho * saturate(sv.s_v, cfg.epsilon_bl)
}

pub fn asmc_torque(sv: &SlidingVars, gains: &AdaptiveGains, cfg: &AsmcConfig) -> f64 {
    let rho = gains.k_w0 + gains.k_w1 * sv.xi_w_norm + gains.k_v2 * sv.xi_v_norm;
    -cfg.lambda_w * sv.s_w - rho * saturate(sv.s_w, cfg.epsilon_bl)
}

/// Bounded-gain comparison law: switching gains `K̂_v0` and `K̂_w0` only.
pub fn baseline_asmc(sv: &SlidingVars, gains: &AdaptiveGains, cfg: &AsmcConfig) -> ControlWrench {
    ControlWrench {
        force: -cfg.lambda_v * sv.s_v - gains.k_v0 * saturate(sv.s_v, cfg.epsilon_bl),
        torque: -cfg.lambda_w * sv.s_w - gains.k_w0 * saturate(sv.s_w, cfg.epsilon_bl),
    }
}

/// Advances `K̇ = drive − αK` over `dt` with the drive held constant.
///
/// The exact exponential solution keeps `K` positive for every step size
/// and reproduces `K(0)·exp(−αt)` under zero drive.
fn leak_step(k: f64, drive: f64, alpha: f64, dt: f64, clamp: Option<f64>) -> f64 {
    let decay = (-alpha * dt).exp();
    let next = k * decay + drive * (-(-alpha * dt).exp_m1()) / alpha;
    match clamp {
        Some(c) => next.min(c),
        None => next,
    }
}

pub fn adapt_gains(gains: &AdaptiveGains, sv: &SlidingVars, cfg: &AsmcConfig, dt: f64) -> AdaptiveGains {
    let sv_abs = sv.s_v.abs();
    let sw_abs = sv.s_w.abs();
    let c = cfg.gain_clamp;
    AdaptiveGains {
        k_v0: leak_step(gains.k_v0, sv_abs, cfg.alpha_v0, dt, c),
        k_v1: leak_step(gains.k_v1, sv_abs * sv.xi_v_norm, cfg.alpha_v1, dt, c),
        k_w2: leak_step(gains.k_w2, sw_abs * sv.xi_w_norm, cfg.alpha_w2, dt, c),
        k_w0: leak_step(gains.k_w0, sw_abs, cfg.alpha_w0, dt, c),
        k_w1: leak_step(gains.k_w1, sw_abs * sv.xi_w_norm, cfg.alpha_w1, dt, c),
        k_v2: leak_step(gains.k_v2, sv_abs * sv.xi_v_norm, cfg.alpha_v2, dt, c),
    }
}

/// Baseline adaptation: only `K̂_v0` and `K̂_w0` evolve; the rest stay frozen.
pub fn baseline_adapt_gains(gains: &AdaptiveGains, sv: &SlidingVars, cfg: &AsmcConfig, dt: f64) -> AdaptiveGains {
    AdaptiveGains {
        k_v0: leak_step(gains.k_v0, sv.s_v.abs(), cfg.alpha_v0, dt, cfg.gain_clamp),
        k_w0: leak_step(gains.k_w0, sv.s_w.abs(), cfg.alpha_w0, dt, cfg.gain_clamp),
        ..*gains
    }
}

/// Per-robot dynamic controller: sliding update, wrench, then adaptation.
#[derive(Debug, Clone)]
pub struct VelocityController {
    kind: ControllerKind,
    cfg: AsmcConfig,
    state: AdaptiveState,
}

impl VelocityController {
    pub fn new(kind: ControllerKind, cfg: AsmcConfig) -> Self {
        Self {
            kind,
            state: AdaptiveState::new(cfg.initial_gains),
            cfg,
        }
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn state(&self) -> &AdaptiveState {
        &self.state
    }

    /// Returns the sliding variables, the gains used for this wrench, and
    /// the wrench itself. Gains and integrals advance by `dt` afterwards.
    pub fn step(
        &mut self,
        v: f64,
        omega: f64,
        cmd: &VelocityCommand,
        dt: f64,
    ) -> (SlidingVars, AdaptiveGains, ControlWrench) {
        let sv = update_sliding(&mut self.state, v, omega, cmd, &self.cfg, dt);
        let gains = self.state.gains;
        let wrench = match self.kind {
            ControllerKind::Proposed => ControlWrench {
                force: asmc_force(&sv, &gains, &self.cfg),
                torque: asmc_torque(&sv, &gains, &self.cfg),
            },
            ControllerKind::Baseline => baseline_asmc(&sv, &gains, &self.cfg),
        };
        self.state.gains = match self.kind {
            ControllerKind::Proposed => adapt_gains(&gains, &sv, &self.cfg, dt),
            ControllerKind::Baseline => baseline_adapt_gains(&gains, &sv, &self.cfg, dt),
        };
        (sv, gains, wrench)
    }
}
