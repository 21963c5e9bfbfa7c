//! Footstep control: reference trajectory, predictive filter and balance
//! control.
//!
//! Each tick the controller
//!
//! 1. derives the nominal end-of-step state from the commanded velocity,
//! 2. filters the measured CoM state against the pendulum model and predicts
//!    it forward by the actuation latency,
//! 3. picks a lateral ZMP offset that restores the nominal step frequency,
//!    the remaining step time, a sagittal ZMP offset, and finally the next
//!    footstep, which is converted into a swing amplitude for the CPG.
//!
//! All states are in the current footstep frame; `lambda` is +1 while the
//! right foot supports and -1 for the left.

use crate::cpg::{Range, SwingAmplitude};
use crate::estimation::{Frame2, SupportState};
use crate::lipm::{
    lipm_predict, orbital_energy, position_arrivals, predict_vel, time_to_position, velocity_arrivals, ComState,
    PendulumParams, State1D, ZmpOffset,
};
use crate::math::{abs, cosh, exp, sinh, sqrt};

/// Arrivals closer than this are treated as "now" and skipped when looking
/// for the next crossing.
pub const ARRIVAL_EPS: f64 = 1e-9;

/// Commanded walking velocity, each axis normalized to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaitTarget {
    pub vx: f64,
    pub vy: f64,
    pub vpsi: f64,
}

impl GaitTarget {
    pub const STOP: GaitTarget = GaitTarget { vx: 0.0, vy: 0.0, vpsi: 0.0 };

    pub fn new(vx: f64, vy: f64, vpsi: f64) -> Self {
        Self { vx, vy, vpsi }.clamped()
    }

    pub fn clamped(self) -> Self {
        let c = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
        Self { vx: c(self.vx), vy: c(self.vy), vpsi: c(self.vpsi) }
    }
}

/// Shape of the nominal CoM trajectory and the actuation limits around it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RefConfig {
    /// Lateral apex distance, m.
    pub alpha: f64,
    /// Minimal lateral support-exchange distance, m.
    pub delta: f64,
    /// Maximal lateral support-exchange distance, m.
    pub omega: f64,
    /// Sagittal CoM displacement at full forward speed, m.
    pub sigma: f64,
    /// Sagittal CoM excursion beyond which a step is forced, m.
    pub cx_max: f64,
    /// Sagittal ZMP range, m.
    pub zx: Range,
    /// Lateral ZMP range under a right support foot, m; mirrored for the left.
    pub zy: Range,
    /// Swing amplitude components are clamped to `[-amplitude_limit, amplitude_limit]`.
    pub amplitude_limit: f64,
}

impl Default for RefConfig {
    fn default() -> Self {
        Self {
            alpha: 0.04,
            delta: 0.06,
            omega: 0.10,
            sigma: 0.10,
            cx_max: 0.12,
            zx: Range::new(-0.04, 0.04),
            zy: Range::new(-0.02, 0.02),
            amplitude_limit: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlConfigError {
    ReferenceOrder,
    NonPositive(&'static str),
    EmptyRange(&'static str),
}

impl core::fmt::Display for ControlConfigError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ControlConfigError::ReferenceOrder => f.write_str("need 0 < alpha < delta <= omega"),
            ControlConfigError::NonPositive(name) => write!(f, "{name} must be positive"),
            ControlConfigError::EmptyRange(name) => write!(f, "{name} range is empty"),
        }
    }
}

impl RefConfig {
    pub fn validate(&self) -> Result<(), ControlConfigError> {
        if !(0.0 < self.alpha && self.alpha < self.delta && self.delta <= self.omega) {
            return Err(ControlConfigError::ReferenceOrder);
        }
        if self.sigma <= 0.0 {
            return Err(ControlConfigError::NonPositive("sigma"));
        }
        if self.cx_max <= 0.0 {
            return Err(ControlConfigError::NonPositive("cx_max"));
        }
        if self.amplitude_limit <= 0.0 {
            return Err(ControlConfigError::NonPositive("amplitude_limit"));
        }
        if self.zx.min > self.zx.max {
            return Err(ControlConfigError::EmptyRange("zx"));
        }
        if self.zy.min > self.zy.max {
            return Err(ControlConfigError::EmptyRange("zy"));
        }
        Ok(())
    }

    /// Lateral ZMP bounds under the support foot with sign `lambda`.
    pub fn zy_bounds(&self, lambda: f64) -> Range {
        if lambda < 0.0 {
            Range::new(-self.zy.max, -self.zy.min)
        } else {
            self.zy
        }
    }
}

/// Predictive filter tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FilterConfig {
    /// Width of the post-exchange noise suppression, s.
    pub epsilon: f64,
    /// Gain of the distance-based blending.
    pub k: f64,
    /// Latency the output state is predicted ahead by, s.
    pub latency: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { epsilon: 0.07, k: 0.5, latency: 0.054 }
    }
}

/// End-of-step target state plus timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalState {
    pub sx: f64,
    pub svx: f64,
    pub sy: f64,
    pub svy: f64,
    /// Remaining nominal step time, s. Equals `2 * tau` right at an exchange.
    pub t_nom: f64,
    /// Apex-to-exchange time, s.
    pub tau: f64,
}

/// Nominal support-exchange state for the commanded velocity and support sign.
///
/// The lateral exchange location is widened toward `omega` only on the
/// leading step (support sign equal to the sign of `vy`); the trailing step
/// always exchanges at `delta`.
pub fn reference_trajectory(v: &GaitTarget, lambda: f64, cfg: &RefConfig, p: &PendulumParams) -> NominalState {
    let v = v.clamped();
    let sgn_vy = if v.vy > 0.0 {
        1.0
    } else if v.vy < 0.0 {
        -1.0
    } else {
        0.0
    };
    let xi_y =
        if lambda == sgn_vy { lambda * (cfg.delta + abs(v.vy) * (cfg.omega - cfg.delta)) } else { lambda * cfg.delta };
    let xi_x = v.vx * cfg.sigma;
    let tau = time_to_position(xi_y, State1D::new(lambda * cfg.alpha, 0.0), p)
        .unwrap_or_else(|| libm::acosh(abs(xi_y) / cfg.alpha) / p.c);
    NominalState {
        sx: xi_x,
        svx: p.c * xi_x / sinh(p.c * tau),
        sy: xi_y,
        svy: lambda * p.c * sqrt(xi_y * xi_y - cfg.alpha * cfg.alpha),
        t_nom: 2.0 * tau,
        tau,
    }
}

/// Predictive filter state: raw input, model state and latency-predicted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub rx: ComState,
    pub mx: ComState,
    pub tx: ComState,
    /// Blending factor applied on the last update.
    pub b: f64,
    /// Support sign the states are expressed for.
    pub lambda: f64,
}

impl FilterState {
    pub fn new(initial: ComState, lambda: f64) -> Self {
        Self { rx: initial, mx: initial, tx: initial, b: 0.0, lambda }
    }
}

/// Step noise suppression: zero right after an exchange, rising smoothly once
/// `t_s` exceeds `epsilon`.
pub fn step_suppression(t_s: f64, epsilon: f64) -> f64 {
    let d = (t_s - epsilon).max(0.0);
    1.0 - exp(-(d * d) / (2.0 * epsilon * epsilon))
}

/// One filter update.
///
/// The model state is propagated by one loop period with the last commanded
/// ZMP. If the support sign changed since the last update, propagation runs
/// up to the exchange in the old frame, relocates into the new footstep frame
/// and continues about the new base. The result is blended with the raw state
/// by `b = clamp(f_s * f_d, 0, 1)` and predicted ahead by the latency.
pub fn predictive_filter(
    raw: &ComState,
    fs: &FilterState,
    support: &SupportState,
    p: &PendulumParams,
    z: &ZmpOffset,
    cfg: &FilterConfig,
    rho: f64,
) -> FilterState {
    let predicted = if support.lambda != fs.lambda {
        let after = support.time_since_exchange.clamp(0.0, rho);
        let before = lipm_predict(&fs.mx, z, p, rho - after);
        let moved = Frame2::relocate(&support.relocation, &before);
        lipm_predict(&moved, &ZmpOffset::ZERO, p, after)
    } else {
        lipm_predict(&fs.mx, z, p, rho)
    };
    let f_s = step_suppression(support.time_since_exchange, cfg.epsilon);
    let f_d = cfg.k * raw.distance(&predicted);
    let b = (f_s * f_d).clamp(0.0, 1.0);
    let mx = raw.blend(&predicted, b);
    let tx = lipm_predict(&mx, z, p, cfg.latency);
    FilterState { rx: *raw, mx, tx, b, lambda: support.lambda }
}

/// A ZMP offset before and after bounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedZmp {
    pub raw: f64,
    pub value: f64,
    pub clamped: bool,
}

impl BoundedZmp {
    fn new(raw: f64, range: Range) -> Self {
        let value = range.clamp(raw);
        Self { raw, value, clamped: value != raw }
    }
}

/// Constant base offset that brings `s` to `target` after `t`, unbounded.
/// `None` when `t` is too short for the base to have any effect.
pub fn zmp_to_reach(s: State1D, target: f64, t: f64, p: &PendulumParams) -> Option<f64> {
    if !(t > 0.0) {
        return None;
    }
    let ct = p.c * t;
    let denom = cosh(ct) - 1.0;
    if !(denom > 0.0) || !denom.is_finite() {
        return None;
    }
    Some((s.x * cosh(ct) + s.v / p.c * sinh(ct) - target) / denom)
}

/// Lateral ZMP that reaches `nom.sy` at the remaining nominal time `nom.t_nom`.
/// `None` if `t_nom <= 0`; callers keep their previous value.
pub fn lateral_zmp(
    c: &ComState,
    nom: &NominalState,
    lambda: f64,
    cfg: &RefConfig,
    p: &PendulumParams,
) -> Option<BoundedZmp> {
    zmp_to_reach(c.lateral(), nom.sy, nom.t_nom, p).map(|raw| BoundedZmp::new(raw, cfg.zy_bounds(lambda)))
}

/// Sagittal ZMP that reaches `nom.sx` at the chosen step time `t`.
pub fn sagittal_zmp(
    c: &ComState,
    nom: &NominalState,
    t: f64,
    cfg: &RefConfig,
    p: &PendulumParams,
) -> Option<BoundedZmp> {
    zmp_to_reach(c.sagittal(), nom.sx, t, p).map(|raw| BoundedZmp::new(raw, cfg.zx))
}

/// Which rule produced the step time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepTimeCase {
    /// The sagittal limit is reached before the lateral exchange location.
    SagittalLimit,
    /// Time until the lateral exchange location is reached.
    Nominal,
    /// The exchange location is never reached but a lateral apex lies ahead.
    IrregularApex,
    /// Positive lateral energy: the CoM tips over the support foot; hold.
    TipOver,
    /// Step immediately.
    Immediate,
}

impl StepTimeCase {
    pub fn as_str(self) -> &'static str {
        match self {
            StepTimeCase::SagittalLimit => "sagittal_limit",
            StepTimeCase::Nominal => "nominal",
            StepTimeCase::IrregularApex => "irregular_apex",
            StepTimeCase::TipOver => "tip_over",
            StepTimeCase::Immediate => "immediate",
        }
    }
}

impl core::fmt::Display for StepTimeCase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Step time constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct StepTimeConfig {
    /// Step time commanded while the CoM tips over the support foot, s.
    pub tipover_hold: f64,
}

impl Default for StepTimeConfig {
    fn default() -> Self {
        Self { tipover_hold: 2.0 }
    }
}

/// First time the sagittal CoM crosses `+-cx_max` moving outward.
pub fn time_to_sagittal_limit(c: &ComState, cx_max: f64, p: &PendulumParams) -> Option<f64> {
    let s = c.sagittal();
    [cx_max, -cx_max]
        .into_iter()
        .flat_map(|target| {
            let arrivals = position_arrivals(target, s, p);
            arrivals.as_slice().iter().copied().find(|&t| predict_vel(s, p, t) * target > 0.0)
        })
        .reduce(f64::min)
}

/// Remaining step time and the rule that produced it.
///
/// `zy` must already be bounded. The lateral rules are tried in order: the
/// time until the CoM passes the exchange location moving away from the
/// support foot, then a lateral apex still ahead, then the tip-over hold,
/// else an immediate step. The sagittal limit overrides them if it is
/// reached strictly earlier.
pub fn step_time(
    c: &ComState,
    nom: &NominalState,
    zy: f64,
    cfg: &RefConfig,
    st: &StepTimeConfig,
    p: &PendulumParams,
) -> (f64, StepTimeCase) {
    let shifted = State1D::new(c.cy - zy, c.vy);
    // only an outward crossing is an exchange; a CoM starting just beyond
    // s_y crosses it inward first
    let outward = nom.sy.signum();
    let t_sy = position_arrivals(nom.sy - zy, shifted, p)
        .as_slice()
        .iter()
        .copied()
        .find(|&t| t > ARRIVAL_EPS && predict_vel(shifted, p, t) * outward > 0.0);
    let lateral = if let Some(t) = t_sy {
        (t, StepTimeCase::Nominal)
    } else if let Some(t) = velocity_arrivals(0.0, shifted, p).first_after(ARRIVAL_EPS) {
        (t, StepTimeCase::IrregularApex)
    } else if orbital_energy(c.lateral(), p) > 0.0 {
        (st.tipover_hold, StepTimeCase::TipOver)
    } else {
        (0.0, StepTimeCase::Immediate)
    };
    match time_to_sagittal_limit(c, cfg.cx_max, p) {
        Some(tc) if tc < lateral.0 => (tc, StepTimeCase::SagittalLimit),
        _ => lateral,
    }
}

/// Predicted end-of-step state and the next footstep relative to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootstepLocation {
    pub end_state: ComState,
    pub sx: f64,
    pub sy: f64,
}

impl FootstepLocation {
    /// Footstep position relative to the current support foot.
    pub fn step(&self) -> (f64, f64) {
        (self.end_state.cx + self.sx, self.end_state.cy + self.sy)
    }
}

/// Places the next foot so the CoM sits midway between the feet sagittally
/// and passes the next lateral apex at `alpha`.
pub fn footstep_location(
    c: &ComState,
    z: &ZmpOffset,
    t: f64,
    cfg: &RefConfig,
    p: &PendulumParams,
    lambda: f64,
) -> FootstepLocation {
    let end = lipm_predict(c, z, p, t);
    let vy = end.vy / p.c;
    FootstepLocation { end_state: end, sx: end.cx, sy: lambda * sqrt(vy * vy + cfg.alpha * cfg.alpha) }
}

/// Swing amplitude for a footstep `(step_x, step_y)` relative to the current
/// support foot, plus whether any component had to be clamped.
///
/// A sagittal step of `2 sigma` maps to `ax = 1`; a lateral step of `2 delta`
/// toward the swing side maps to `ay = 0` and `2 omega` to `ay = lambda`.
pub fn amplitude_conversion(step: (f64, f64), v: &GaitTarget, lambda: f64, cfg: &RefConfig) -> (SwingAmplitude, bool) {
    let ax = 0.5 * step.0 / cfg.sigma;
    let ay = lambda * (0.5 * lambda * step.1 - cfg.delta) / (cfg.omega - cfg.delta);
    let raw = SwingAmplitude::new(ax, ay, v.clamped().vpsi);
    let lim = cfg.amplitude_limit;
    let c = |a: f64| a.clamp(-lim, lim);
    let a = SwingAmplitude::new(c(raw.ax), c(raw.ay), c(raw.apsi));
    (a, a != raw)
}

/// Inverse of [`amplitude_conversion`]: the footstep a swing amplitude produces.
pub fn amplitude_to_step(a: &SwingAmplitude, lambda: f64, cfg: &RefConfig) -> (f64, f64) {
    let x = 2.0 * cfg.sigma * a.ax;
    let y = 2.0 * lambda * (cfg.delta + lambda * a.ay * (cfg.omega - cfg.delta));
    (x, y)
}

/// Output of one controller tick, consumed by the CPG.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub amplitude: SwingAmplitude,
    /// Remaining step time, s.
    pub step_time: f64,
    /// Diagnostic only; the CPG does not use the ZMP.
    pub zmp: ZmpOffset,
}

/// Everything computed during a tick, for logging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub filter: FilterState,
    pub nominal: NominalState,
    pub zmp_raw: ZmpOffset,
    pub zmp: ZmpOffset,
    pub zmp_clamped: (bool, bool),
    pub step_time: f64,
    pub case: StepTimeCase,
    pub footstep: FootstepLocation,
    pub amplitude_clamped: bool,
    pub exchanged: bool,
}

/// Controller constants it needs besides the pendulum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerConfig {
    pub pendulum: PendulumParams,
    pub reference: RefConfig,
    pub filter: FilterConfig,
    pub step_time: StepTimeConfig,
    /// Loop period, s.
    pub rho: f64,
}

/// Remaining nominal step time as seen from the latency-predicted state.
/// Zero once the nominal exchange lies before the actuation time.
pub fn remaining_nominal_time(nom: &NominalState, t_since_exchange: f64, latency: f64) -> f64 {
    (2.0 * nom.tau - t_since_exchange - latency).max(0.0)
}

/// One footstep controller per gait; ticks are sequential.
#[derive(Debug, Clone)]
pub struct FootstepController {
    cfg: ControllerConfig,
    filter: Option<FilterState>,
    zmp: ZmpOffset,
}

impl FootstepController {
    pub fn new(cfg: ControllerConfig) -> Self {
        Self { cfg, filter: None, zmp: ZmpOffset::ZERO }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn reset(&mut self) {
        self.filter = None;
        self.zmp = ZmpOffset::ZERO;
    }

    /// Runs one control tick on the raw CoM state and returns `(A, T)` with
    /// diagnostics.
    pub fn tick(&mut self, v: &GaitTarget, raw: &ComState, support: &SupportState) -> (StepParams, Diagnostics) {
        let ControllerConfig { pendulum: p, reference: rc, filter: fc, step_time: st, rho } = self.cfg;
        let v = v.clamped();
        let lambda = support.lambda;

        let prev = self.filter.unwrap_or_else(|| FilterState::new(*raw, lambda));
        let exchanged = self.filter.is_some() && prev.lambda != lambda;
        let fs = if self.filter.is_some() {
            let fs = predictive_filter(raw, &prev, support, &p, &self.zmp, &fc, rho);
            if exchanged {
                // previous offsets refer to the old foot
                self.zmp = ZmpOffset::ZERO;
                FilterState { tx: lipm_predict(&fs.mx, &self.zmp, &p, fc.latency), ..fs }
            } else {
                fs
            }
        } else {
            let mut fresh = prev;
            fresh.tx = lipm_predict(&fresh.mx, &self.zmp, &p, fc.latency);
            fresh
        };
        self.filter = Some(fs);
        let c = fs.tx;

        let mut nom = reference_trajectory(&v, lambda, &rc, &p);
        nom.t_nom = remaining_nominal_time(&nom, support.time_since_exchange, fc.latency);

        let zy = lateral_zmp(&c, &nom, lambda, &rc, &p);
        let zy_value = zy.map_or(self.zmp.zy, |z| z.value);
        let (t, case) = step_time(&c, &nom, zy_value, &rc, &st, &p);
        let zx = sagittal_zmp(&c, &nom, t, &rc, &p);
        let zx_value = zx.map_or(self.zmp.zx, |z| z.value);
        let zmp = ZmpOffset::new(zx_value, zy_value);

        let footstep = footstep_location(&c, &zmp, t, &rc, &p, lambda);
        let (amplitude, amplitude_clamped) = amplitude_conversion(footstep.step(), &v, lambda, &rc);
        self.zmp = zmp;

        let params = StepParams { amplitude, step_time: t, zmp };
        let diag = Diagnostics {
            filter: fs,
            nominal: nom,
            zmp_raw: ZmpOffset::new(zx.map_or(zx_value, |z| z.raw), zy.map_or(zy_value, |z| z.raw)),
            zmp,
            zmp_clamped: (zx.is_some_and(|z| z.clamped), zy.is_some_and(|z| z.clamped)),
            step_time: t,
            case,
            footstep,
            amplitude_clamped,
            exchanged,
        };
        (params, diag)
    }
}

/// Step parameters of the uncontrolled gait: the nominal amplitude for the
/// commanded velocity and the remaining nominal step time.
pub fn open_loop_step(v: &GaitTarget, support: &SupportState, cfg: &ControllerConfig) -> StepParams {
    let v = v.clamped();
    let nom = reference_trajectory(&v, support.lambda, &cfg.reference, &cfg.pendulum);
    let (amplitude, _) = amplitude_conversion((2.0 * nom.sx, 2.0 * nom.sy), &v, support.lambda, &cfg.reference);
    let t = (2.0 * nom.tau - support.time_since_exchange - cfg.filter.latency).max(0.0);
    StepParams { amplitude, step_time: t, zmp: ZmpOffset::ZERO }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> PendulumParams {
        PendulumParams::with_constant(3.0, 9.81, 9.81 / 9.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        abs(a - b) <= tol
    }

    #[test]
    fn reference_at_rest() {
        let n = reference_trajectory(&GaitTarget::STOP, 1.0, &RefConfig::default(), &p3());
        assert_eq!((n.sx, n.svx, n.sy), (0.0, 0.0, 0.06));
        assert!(close(n.svy, 0.134164, 1e-6));
        assert!(close(n.tau, 0.320808, 1e-6));
        assert!(close(n.t_nom, 0.641616, 2e-6));
    }

    #[test]
    fn reference_leading_and_trailing() {
        let cfg = RefConfig::default();
        let lead = reference_trajectory(&GaitTarget::new(0.0, 1.0, 0.0), 1.0, &cfg, &p3());
        assert!(close(lead.sy, 0.10, 1e-15));
        let trail = reference_trajectory(&GaitTarget::new(0.0, 1.0, 0.0), -1.0, &cfg, &p3());
        assert!(close(trail.sy, -0.06, 1e-15));
        assert!(trail.svy < 0.0);
    }

    #[test]
    fn suppression_window() {
        assert_eq!(step_suppression(0.0, 0.07), 0.0);
        assert_eq!(step_suppression(0.07, 0.07), 0.0);
        assert!(step_suppression(1.0, 0.07) > 0.999);
    }

    #[test]
    fn filter_blend_examples() {
        let p = p3();
        let fc = FilterConfig::default();
        let c = ComState::new(0.0, 0.1, 0.05, -0.1);
        let fs = FilterState::new(c, 1.0);
        let support = SupportState { time_since_exchange: 1.0, ..SupportState::new(1.0) };
        // raw equal to the model prediction: nothing to blend
        let expect = lipm_predict(&c, &ZmpOffset::ZERO, &p, 0.01);
        let out = predictive_filter(&expect, &fs, &support, &p, &ZmpOffset::ZERO, &fc, 0.01);
        assert_eq!(out.b, 0.0);
        assert_eq!(out.mx, expect);

        // right after an exchange the raw input is ignored
        let mut just = SupportState::new(1.0);
        just.time_since_exchange = 0.0;
        let off = ComState::new(0.3, 0.0, 0.0, 0.0);
        let out = predictive_filter(&off, &fs, &just, &p, &ZmpOffset::ZERO, &fc, 0.01);
        assert_eq!(out.b, 0.0);

        // distance 0.1 long after the exchange: b = 0.5 * 0.1 * f_s
        let mut raw = expect;
        raw.cx += 0.1;
        let out = predictive_filter(&raw, &fs, &support, &p, &ZmpOffset::ZERO, &fc, 0.01);
        assert!(close(out.b, 0.05, 1e-6), "{}", out.b);
    }

    #[test]
    fn zmp_vanishes_on_target() {
        let p = p3();
        let cfg = RefConfig::default();
        let mut nom = reference_trajectory(&GaitTarget::STOP, 1.0, &cfg, &p);
        // apex state: reaches s_y after tau
        nom.t_nom = nom.tau;
        let c = ComState::new(0.0, 0.0, 0.04, 0.0);
        let z = lateral_zmp(&c, &nom, 1.0, &cfg, &p).unwrap();
        assert!(z.raw.abs() < 1e-12, "{}", z.raw);
        let zx = sagittal_zmp(&c, &nom, 0.3, &cfg, &p).unwrap();
        assert_eq!(zx.raw, 0.0);
    }

    #[test]
    fn zmp_degenerate_time() {
        let p = p3();
        let cfg = RefConfig::default();
        let mut nom = reference_trajectory(&GaitTarget::STOP, 1.0, &cfg, &p);
        nom.t_nom = 0.0;
        assert!(lateral_zmp(&ComState::default(), &nom, 1.0, &cfg, &p).is_none());
        assert!(sagittal_zmp(&ComState::default(), &nom, 0.0, &cfg, &p).is_none());
    }

    #[test]
    fn tip_over_holds() {
        let p = p3();
        let cfg = RefConfig::default();
        let nom = reference_trajectory(&GaitTarget::STOP, 1.0, &cfg, &p);
        let c = ComState::new(0.0, 0.0, 0.1, 0.4);
        assert!(close(orbital_energy(c.lateral(), &p), 0.035, 1e-15));
        let (t, case) = step_time(&c, &nom, 0.0, &cfg, &StepTimeConfig::default(), &p);
        assert_eq!(case, StepTimeCase::TipOver);
        assert_eq!(t, 2.0);
    }

    #[test]
    fn immediate_step_past_location() {
        let p = p3();
        let cfg = RefConfig::default();
        let nom = reference_trajectory(&GaitTarget::STOP, 1.0, &cfg, &p);
        // past s_y, moving outward, negative energy: no apex ahead
        let c = ComState::new(0.0, 0.0, 0.08, 0.15);
        assert!(orbital_energy(c.lateral(), &p) < 0.0);
        let (t, case) = step_time(&c, &nom, 0.0, &cfg, &StepTimeConfig::default(), &p);
        assert_eq!((t, case), (0.0, StepTimeCase::Immediate));
    }

    #[test]
    fn footstep_apex_case() {
        let p = p3();
        let cfg = RefConfig::default();
        let c = ComState::new(0.0, 0.0, 0.04, 0.0);
        let f = footstep_location(&c, &ZmpOffset::ZERO, 0.0, &cfg, &p, -1.0);
        assert!(close(f.sy, -0.04, 1e-15));
        let moving = ComState::new(0.0, 0.0, 0.06, 0.134164);
        let f = footstep_location(&moving, &ZmpOffset::ZERO, 0.0, &cfg, &p, 1.0);
        assert!(close(f.sy, 0.06, 1e-6));
    }

    #[test]
    fn amplitude_examples() {
        let cfg = RefConfig::default();
        let v = GaitTarget::new(0.0, 0.0, 0.3);
        let (a, _) = amplitude_conversion((0.0, 2.0 * cfg.delta), &v, 1.0, &cfg);
        assert!(a.ay.abs() < 1e-15);
        assert_eq!(a.apsi, 0.3);
        let (a, _) = amplitude_conversion((0.0, 2.0 * cfg.omega), &v, 1.0, &cfg);
        assert!(close(a.ay, 1.0, 1e-12));
        let (a, _) = amplitude_conversion((2.0 * cfg.sigma, 2.0 * cfg.delta), &v, 1.0, &cfg);
        assert!(close(a.ax, 1.0, 1e-15));
        let (a, clamped) = amplitude_conversion((5.0 * cfg.sigma, 2.0 * cfg.delta), &v, 1.0, &cfg);
        assert!(clamped);
        assert_eq!(a.ax, 1.0);
    }

    #[test]
    fn amplitude_inverse() {
        let cfg = RefConfig::default();
        for lambda in [-1.0, 1.0] {
            let step = (0.07, lambda * 0.15);
            let (a, clamped) = amplitude_conversion(step, &GaitTarget::STOP, lambda, &cfg);
            assert!(!clamped);
            let back = amplitude_to_step(&a, lambda, &cfg);
            assert!(close(back.0, step.0, 1e-15) && close(back.1, step.1, 1e-15));
        }
    }

    #[test]
    fn gait_target_clamps() {
        let v = GaitTarget::new(2.0, -3.0, f64::NAN);
        assert_eq!((v.vx, v.vy, v.vpsi), (1.0, -1.0, 0.0));
    }
}
