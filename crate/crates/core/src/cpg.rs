//! Central-pattern-generated stepping motion.
//!
//! Motion primitives write into the abstract leg interface (leg extension,
//! leg angle, foot angle); [`leg_interface_map`] turns that into joint angles
//! without any link lengths. The phase `mu` runs over `[-pi, pi)`: for the
//! right leg `mu < 0` is support and `mu >= 0` is swing, the left leg runs half
//! a cycle behind.
//!
//! Amplitude axes: `ax` is sagittal and drives leg pitch, `ay` is lateral and
//! drives leg roll, `apsi` drives leg yaw.

use core::f64::consts::PI;

use crate::math::{abs, acos, cos, sin, wrap_angle};

/// Which leg (or arm) a pattern is generated for. The sign is +1 for the right
/// side and -1 for the left, matching the support-foot sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// The phase this side runs on, given the gait phase.
    pub fn phase(self, mu: f64) -> f64 {
        match self {
            Side::Right => mu,
            Side::Left => shifted_phase(mu),
        }
    }
}

/// Abstract leg pose.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LegInterfaceParams {
    /// Leg shortening: 0 is a straight leg, 1 folds the knee completely.
    pub eta: f64,
    pub leg_roll: f64,
    pub leg_pitch: f64,
    pub leg_yaw: f64,
    pub foot_roll: f64,
    pub foot_pitch: f64,
}

/// Joint angles of one leg, rad.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LegJoints {
    pub hip_yaw: f64,
    pub hip_roll: f64,
    pub hip_pitch: f64,
    pub knee: f64,
    pub ankle_pitch: f64,
    pub ankle_roll: f64,
}

impl LegJoints {
    pub fn to_array(&self) -> [f64; 6] {
        [self.hip_yaw, self.hip_roll, self.hip_pitch, self.knee, self.ankle_pitch, self.ankle_roll]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self { hip_yaw: a[0], hip_roll: a[1], hip_pitch: a[2], knee: a[3], ankle_pitch: a[4], ankle_roll: a[5] }
    }
}

/// Abstract arm pose: the arm swings with the leg pattern of the other side.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmInterfaceParams {
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmJoints {
    pub shoulder_pitch: f64,
    pub shoulder_roll: f64,
    pub elbow: f64,
}

/// Full-body joint targets.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointAngles {
    pub right_leg: LegJoints,
    pub left_leg: LegJoints,
    pub right_arm: ArmJoints,
    pub left_arm: ArmJoints,
}

impl JointAngles {
    pub fn leg(&self, side: Side) -> &LegJoints {
        match side {
            Side::Right => &self.right_leg,
            Side::Left => &self.left_leg,
        }
    }

    /// All 18 joint values in a fixed order (right leg, left leg, right arm, left arm).
    pub fn to_array(&self) -> [f64; 18] {
        let mut out = [0.0; 18];
        out[..6].copy_from_slice(&self.right_leg.to_array());
        out[6..12].copy_from_slice(&self.left_leg.to_array());
        let arm = |a: &ArmJoints| [a.shoulder_pitch, a.shoulder_roll, a.elbow];
        out[12..15].copy_from_slice(&arm(&self.right_arm));
        out[15..18].copy_from_slice(&arm(&self.left_arm));
        out
    }

    pub fn within(&self, limits: &JointLimits) -> bool {
        let leg_ok = |l: &LegJoints| {
            limits.hip_yaw.contains(l.hip_yaw)
                && limits.hip_roll.contains(l.hip_roll)
                && limits.hip_pitch.contains(l.hip_pitch)
                && limits.knee.contains(l.knee)
                && limits.ankle_pitch.contains(l.ankle_pitch)
                && limits.ankle_roll.contains(l.ankle_roll)
        };
        let arm_ok = |a: &ArmJoints| {
            limits.shoulder_pitch.contains(a.shoulder_pitch)
                && limits.shoulder_roll.contains(a.shoulder_roll)
                && limits.elbow.contains(a.elbow)
        };
        leg_ok(&self.right_leg) && leg_ok(&self.left_leg) && arm_ok(&self.right_arm) && arm_ok(&self.left_arm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

/// Joint limits for a right-leg / right-arm; the left side mirrors roll and yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct JointLimits {
    pub hip_yaw: Range,
    pub hip_roll: Range,
    pub hip_pitch: Range,
    pub knee: Range,
    pub ankle_pitch: Range,
    pub ankle_roll: Range,
    pub shoulder_pitch: Range,
    pub shoulder_roll: Range,
    pub elbow: Range,
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            hip_yaw: Range::new(-0.8, 0.8),
            hip_roll: Range::new(-0.8, 0.8),
            hip_pitch: Range::new(-1.8, 1.0),
            knee: Range::new(0.0, 2.2),
            ankle_pitch: Range::new(-1.8, 1.0),
            ankle_roll: Range::new(-0.8, 0.8),
            shoulder_pitch: Range::new(-1.0, 1.0),
            shoulder_roll: Range::new(-0.8, 0.8),
            elbow: Range::new(0.0, 2.0),
        }
    }
}

/// Motion-primitive gains and timing of the stepping pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CpgConfig {
    /// Support-phase push height.
    pub k1: f64,
    /// Swing-phase step height.
    pub k2: f64,
    /// Push increase per unit of `|A|_inf`.
    pub k3: f64,
    /// Lift increase per unit of `|A|_inf`.
    pub k4: f64,
    /// Lateral (roll) swing gain, rad.
    pub k5: f64,
    /// Leg spread per unit of lateral amplitude, rad.
    pub k6: f64,
    /// Leg spread per unit of rotational amplitude, rad.
    pub k7: f64,
    /// Sagittal (pitch) swing gain, rad.
    pub k8: f64,
    /// Yaw swing gain, rad.
    pub k9: f64,
    /// Yaw offset per unit of rotational amplitude, rad.
    pub k10: f64,
    /// Swing start phase, rad.
    pub k_mu0: f64,
    /// Swing end phase, rad.
    pub k_mu1: f64,
    /// Control loop period, s.
    pub rho: f64,
    /// Base leg extension the lift primitive is added to.
    pub neutral_eta: f64,
    /// Fastest permitted half-cycle; bounds the phase rate when `T` is small.
    pub t_min: f64,
    /// Arm swing gain relative to the sagittal leg swing.
    pub arm_gain: f64,
    /// Constant arm abduction, rad.
    pub arm_roll: f64,
    /// Arm extension, same meaning as the leg's `eta`.
    pub arm_eta: f64,
    pub limits: JointLimits,
}

impl Default for CpgConfig {
    fn default() -> Self {
        Self {
            k1: 0.02,
            k2: 0.10,
            k3: 0.02,
            k4: 0.10,
            k5: 0.30,
            k6: 0.20,
            k7: 0.10,
            k8: 0.40,
            k9: 0.30,
            k10: 0.10,
            k_mu0: 0.2,
            k_mu1: 2.8,
            rho: 0.01,
            neutral_eta: 0.1,
            t_min: 0.05,
            arm_gain: 0.8,
            arm_roll: 0.1,
            arm_eta: 0.2,
            limits: JointLimits::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CpgConfigError {
    SwingPhasesOutOfOrder,
    NonPositivePeriod,
    NeutralExtensionOutOfRange,
}

impl core::fmt::Display for CpgConfigError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CpgConfigError::SwingPhasesOutOfOrder => f.write_str("need -pi < k_mu0 < k_mu1 < pi"),
            CpgConfigError::NonPositivePeriod => f.write_str("rho and t_min must be positive"),
            CpgConfigError::NeutralExtensionOutOfRange => f.write_str("neutral_eta and arm_eta must lie in [0, 1]"),
        }
    }
}

impl CpgConfig {
    pub fn validate(&self) -> Result<(), CpgConfigError> {
        if !(-PI < self.k_mu0 && self.k_mu0 < self.k_mu1 && self.k_mu1 < PI) {
            return Err(CpgConfigError::SwingPhasesOutOfOrder);
        }
        if !(self.rho > 0.0 && self.t_min > 0.0) {
            return Err(CpgConfigError::NonPositivePeriod);
        }
        if !(0.0..=1.0).contains(&self.neutral_eta) || !(0.0..=1.0).contains(&self.arm_eta) {
            return Err(CpgConfigError::NeutralExtensionOutOfRange);
        }
        Ok(())
    }
}

/// Normalized three-axis step size command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwingAmplitude {
    pub ax: f64,
    pub ay: f64,
    pub apsi: f64,
}

impl SwingAmplitude {
    pub const ZERO: SwingAmplitude = SwingAmplitude { ax: 0.0, ay: 0.0, apsi: 0.0 };

    pub const fn new(ax: f64, ay: f64, apsi: f64) -> Self {
        Self { ax, ay, apsi }
    }

    pub fn norm_inf(&self) -> f64 {
        abs(self.ax).max(abs(self.ay)).max(abs(self.apsi))
    }

    pub fn is_finite(&self) -> bool {
        self.ax.is_finite() && self.ay.is_finite() && self.apsi.is_finite()
    }
}

/// Result of [`leg_interface_map`]; `clamped` is set when `eta` had to be
/// pulled back into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegMapping {
    pub joints: LegJoints,
    pub clamped: bool,
}

/// Maps the abstract leg pose to joint angles.
///
/// The leg angle is first rotated by the negative leg yaw, acting
/// counterclockwise-positive on the `(pitch, roll)` pair; the extension sets
/// the knee to `2 * acos(1 - eta)` with hip and ankle pitch compensating half
/// each, so the foot stays parallel to the trunk.
pub fn leg_interface_map(p: &LegInterfaceParams) -> LegMapping {
    let eta = p.eta.clamp(0.0, 1.0);
    let clamped = eta != p.eta;
    let (s, c) = (sin(-p.leg_yaw), cos(-p.leg_yaw));
    let pitch = c * p.leg_pitch - s * p.leg_roll;
    let roll = s * p.leg_pitch + c * p.leg_roll;
    let zeta = acos(1.0 - eta);
    LegMapping {
        joints: LegJoints {
            hip_yaw: p.leg_yaw,
            hip_roll: roll,
            hip_pitch: pitch - zeta,
            knee: 2.0 * zeta,
            ankle_pitch: p.foot_pitch - pitch - zeta,
            ankle_roll: p.foot_roll - roll,
        },
        clamped,
    }
}

/// Phase of the left leg: the gait phase shifted by half a cycle, in `[-pi, pi)`.
pub fn shifted_phase(mu: f64) -> f64 {
    if mu < 0.0 {
        mu + PI
    } else {
        mu - PI
    }
}

/// Remaining phase until the next expected support exchange.
///
/// Exactly at `mu = 0` the exchange has just happened, so the full half cycle
/// `pi` remains.
pub fn remaining_phase(mu: f64) -> f64 {
    if mu < 0.0 {
        -mu
    } else {
        PI - mu
    }
}

/// Gait phase plus the sign of the leg expected to be in support
/// (+1 right, -1 left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPhase {
    pub mu: f64,
    pub lambda: f64,
}

impl MotionPhase {
    /// Start of a right-support half cycle.
    pub const START: MotionPhase = MotionPhase { mu: -PI, lambda: 1.0 };

    pub fn new(mu: f64) -> Self {
        let mu = wrap_angle(mu);
        let lambda = if mu < 0.0 { 1.0 } else { -1.0 };
        Self { mu, lambda }
    }
}

impl Default for MotionPhase {
    fn default() -> Self {
        Self::START
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAdvance {
    pub phase: MotionPhase,
    /// A support exchange is expected at this tick (phase reached 0 or wrapped at pi).
    pub exchange_expected: bool,
    /// `T` was below `t_min` and the phase rate was capped.
    pub rate_limited: bool,
}

const BOUNDARY_SNAP: f64 = 1e-12;

/// Advances the phase by one loop period toward the next exchange.
///
/// The increment is `rho * nu / T`, which lands on the boundary after exactly
/// `T` seconds when the caller counts `T` down. The rate is capped at one half
/// cycle per `t_min`, so `T = 0` means "as fast as permitted".
pub fn advance_phase(m: MotionPhase, step_time: f64, cfg: &CpgConfig) -> PhaseAdvance {
    let nu = remaining_phase(m.mu);
    let t = step_time.max(0.0);
    let max_rate = cfg.rho * PI / cfg.t_min;
    let nominal = if t > cfg.rho { cfg.rho * nu / t } else { nu };
    let rate_limited = nominal > max_rate;
    let delta = nominal.min(max_rate);

    let boundary = if m.mu < 0.0 { 0.0 } else { PI };
    let mut mu = m.mu + delta;
    let mut lambda = m.lambda;
    let mut exchange = false;
    if mu >= boundary - BOUNDARY_SNAP {
        exchange = true;
        lambda = -lambda;
        mu = if boundary == 0.0 { 0.0 } else { -PI };
    }
    PhaseAdvance { phase: MotionPhase { mu, lambda }, exchange_expected: exchange, rate_limited }
}

/// Signed leg-extension contribution of the lift primitive for a leg running
/// at phase `mu`: a push against the ground in support, a lift in swing.
pub fn leg_lift(mu: f64, a: &SwingAmplitude, cfg: &CpgConfig) -> f64 {
    let n = a.norm_inf();
    if mu <= 0.0 {
        sin(mu) * (cfg.k1 + cfg.k3 * n)
    } else {
        sin(mu) * (cfg.k2 + cfg.k4 * n)
    }
}

/// Unit swing oscillator: +1 at swing start, -1 at swing end, cosine during
/// the swing and a linear return during support.
pub fn unit_swing(mu: f64, cfg: &CpgConfig) -> f64 {
    let (k0, k1) = (cfg.k_mu0, cfg.k_mu1);
    let span = 2.0 * PI - k1 + k0;
    if mu < k0 {
        2.0 * (mu + 2.0 * PI - k1) / span - 1.0
    } else if mu < k1 {
        cos(PI * (mu - k0) / (k1 - k0))
    } else {
        2.0 * (mu - k1) / span - 1.0
    }
}

/// Leg angle `(roll, pitch, yaw)` for a leg on `side` running at phase `mu`.
pub fn leg_swing(side: Side, mu: f64, a: &SwingAmplitude, cfg: &CpgConfig) -> (f64, f64, f64) {
    let z = unit_swing(mu, cfg);
    let sign = side.sign();
    let spread = (abs(a.ay) * cfg.k6).max(abs(a.apsi) * cfg.k7);
    let roll = -z * a.ay * cfg.k5 - sign * spread;
    let pitch = z * a.ax * cfg.k8;
    let yaw = z * a.apsi * cfg.k9 - sign * abs(a.apsi) * cfg.k10;
    (roll, pitch, yaw)
}

/// Arm pose for the arm on `side`: the sagittal swing of the opposite leg,
/// scaled by the arm gain, plus a constant abduction.
pub fn arm_swing(side: Side, mu: f64, a: &SwingAmplitude, cfg: &CpgConfig) -> ArmInterfaceParams {
    let leg_phase = side.opposite().phase(mu);
    ArmInterfaceParams {
        pitch: unit_swing(leg_phase, cfg) * a.ax * cfg.k8 * cfg.arm_gain,
        roll: -side.sign() * cfg.arm_roll,
    }
}

/// Composed pose and whether any leg extension had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub joints: JointAngles,
    pub clamped: bool,
}

/// Sums all primitives into the leg and arm interfaces and maps them to joints.
pub fn compose_pose(m: &MotionPhase, a: &SwingAmplitude, cfg: &CpgConfig) -> Pose {
    let leg = |side: Side| {
        let mu = side.phase(m.mu);
        let (roll, pitch, yaw) = leg_swing(side, mu, a, cfg);
        leg_interface_map(&LegInterfaceParams {
            eta: cfg.neutral_eta + leg_lift(mu, a, cfg),
            leg_roll: roll,
            leg_pitch: pitch,
            leg_yaw: yaw,
            foot_roll: 0.0,
            foot_pitch: 0.0,
        })
    };
    let arm = |side: Side| {
        let p = arm_swing(side, m.mu, a, cfg);
        ArmJoints { shoulder_pitch: p.pitch, shoulder_roll: p.roll, elbow: 2.0 * acos(1.0 - cfg.arm_eta) }
    };
    let right = leg(Side::Right);
    let left = leg(Side::Left);
    Pose {
        joints: JointAngles {
            right_leg: right.joints,
            left_leg: left.joints,
            right_arm: arm(Side::Right),
            left_arm: arm(Side::Left),
        },
        clamped: right.clamped || left.clamped,
    }
}

/// Stateful wrapper advancing the phase once per tick and composing the pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpgGait {
    pub phase: MotionPhase,
    pub config: CpgConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpgOutput {
    pub pose: Pose,
    pub phase: MotionPhase,
    pub exchange_expected: bool,
}

impl CpgGait {
    pub fn new(config: CpgConfig) -> Self {
        Self { phase: MotionPhase::START, config }
    }

    pub fn tick(&mut self, a: &SwingAmplitude, step_time: f64) -> CpgOutput {
        let adv = advance_phase(self.phase, step_time, &self.config);
        self.phase = adv.phase;
        CpgOutput {
            pose: compose_pose(&self.phase, a, &self.config),
            phase: self.phase,
            exchange_expected: adv.exchange_expected,
        }
    }
}
