//! Kinematic state estimation.
//!
//! Measured joint angles pose a generic humanoid chain, which is then tilted
//! about the center of the support foot sole until the trunk attitude matches
//! the IMU. The ground-projected hip midpoint, expressed in the frame of the
//! support footstep, is used as the CoM. Support exchange is detected from the
//! foot heights with a clearance hysteresis.
//!
//! Pose coordinates: origin at the support sole center, x forward, y left,
//! z up, heading aligned with the (untilted) trunk.

use crate::cpg::{JointAngles, LegJoints, Side};
use crate::lipm::ComState;
use crate::math::{asin, atan2, cos, hypot, sin};

pub type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn rot_x(a: f64) -> Mat3 {
    let (s, c) = (sin(a), cos(a));
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn rot_y(a: f64) -> Mat3 {
    let (s, c) = (sin(a), cos(a));
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = (sin(a), cos(a));
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Trunk attitude rotation: pitch about y applied after roll about x.
pub fn attitude_matrix(roll: f64, pitch: f64) -> [[f64; 3]; 3] {
    mat_mul(&rot_y(pitch), &rot_x(roll))
}

/// Planar pose `(x, y, yaw)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Frame2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Frame2 {
    pub const IDENTITY: Frame2 = Frame2 { x: 0.0, y: 0.0, yaw: 0.0 };

    pub const fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    /// `self * other`: `other` is expressed in this frame.
    pub fn compose(&self, other: &Frame2) -> Frame2 {
        let (px, py) = self.rotate(other.x, other.y);
        Frame2::new(self.x + px, self.y + py, self.yaw + other.yaw)
    }

    pub fn rotate(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = (sin(self.yaw), cos(self.yaw));
        (c * x - s * y, s * x + c * y)
    }

    pub fn rotate_inv(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = (sin(self.yaw), cos(self.yaw));
        (c * x + s * y, -s * x + c * y)
    }

    /// Expresses a point given in the parent frame in this frame.
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        self.rotate_inv(x - self.x, y - self.y)
    }

    /// Re-expresses a CoM state given in this frame in the child frame `next`
    /// (itself expressed in this frame).
    pub fn relocate(next: &Frame2, c: &ComState) -> ComState {
        let (cx, cy) = next.to_local(c.cx, c.cy);
        let (vx, vy) = next.rotate_inv(c.vx, c.vy);
        ComState::new(cx, vx, cy, vy)
    }
}

/// Link lengths of a generic humanoid chain, m. Only their ratios matter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct KinematicModel {
    /// Hip midpoint to neck.
    pub trunk: f64,
    /// Distance between the hip joints.
    pub hip_spacing: f64,
    pub thigh: f64,
    pub shank: f64,
    /// Ankle joint to sole.
    pub ankle_height: f64,
}

impl Default for KinematicModel {
    fn default() -> Self {
        Self { trunk: 0.40, hip_spacing: 0.11, thigh: 0.30, shank: 0.30, ankle_height: 0.04 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimationError {
    NonPositiveLength,
    NonIncreasingTimestamp,
}

impl core::fmt::Display for EstimationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EstimationError::NonPositiveLength => f.write_str("link lengths must be positive"),
            EstimationError::NonIncreasingTimestamp => f.write_str("sensor timestamps must be strictly increasing"),
        }
    }
}

impl KinematicModel {
    pub fn validate(&self) -> Result<(), EstimationError> {
        let all = [self.trunk, self.hip_spacing, self.thigh, self.shank, self.ankle_height];
        if all.iter().all(|l| *l > 0.0 && l.is_finite()) {
            Ok(())
        } else {
            Err(EstimationError::NonPositiveLength)
        }
    }
}

/// One sample of proprioception.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SensorFrame {
    pub joints: JointAngles,
    pub theta_roll: f64,
    pub theta_pitch: f64,
    /// s
    pub timestamp: f64,
}

/// Support foot bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportState {
    /// -1 left, +1 right.
    pub lambda: f64,
    /// Ground projection of the support foot in the odometry frame; fixed
    /// between exchanges.
    pub frame: Frame2,
    /// s since the last exchange.
    pub time_since_exchange: f64,
    /// The current footstep frame expressed in the previous one.
    pub relocation: Frame2,
    /// The feet have been more than the hysteresis distance apart since the
    /// last exchange.
    pub armed: bool,
}

impl SupportState {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda: if lambda < 0.0 { -1.0 } else { 1.0 },
            frame: Frame2::IDENTITY,
            time_since_exchange: 0.0,
            relocation: Frame2::IDENTITY,
            armed: false,
        }
    }

    pub fn side(&self) -> Side {
        if self.lambda < 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Reconstructed body points, anchored at the support sole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPose {
    pub neck: Vec3,
    pub hip_mid: Vec3,
    /// Indexed by [right, left].
    pub hip: [Vec3; 2],
    pub knee: [Vec3; 2],
    pub ankle: [Vec3; 2],
    pub sole: [Vec3; 2],
    /// Heading of each foot in the pose frame, rad.
    pub foot_yaw: [f64; 2],
    pub support: Side,
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Right => 0,
        Side::Left => 1,
    }
}

impl BodyPose {
    pub fn points(&self) -> [Vec3; 10] {
        [
            self.neck,
            self.hip_mid,
            self.hip[0],
            self.hip[1],
            self.knee[0],
            self.knee[1],
            self.ankle[0],
            self.ankle[1],
            self.sole[0],
            self.sole[1],
        ]
    }

    pub fn sole_of(&self, side: Side) -> Vec3 {
        self.sole[side_index(side)]
    }

    pub fn foot_yaw_of(&self, side: Side) -> f64 {
        self.foot_yaw[side_index(side)]
    }

    /// Roll and pitch of the trunk recovered from the hip-to-neck axis.
    pub fn trunk_attitude(&self) -> (f64, f64) {
        let d = sub(&self.neck, &self.hip_mid);
        let len = hypot(hypot(d[0], d[1]), d[2]);
        let roll = asin(-d[1] / len);
        let pitch = atan2(d[0], d[2]);
        (roll, pitch)
    }
}

struct LegChain {
    hip: Vec3,
    knee: Vec3,
    ankle: Vec3,
    sole: Vec3,
    foot_rot: Mat3,
}

fn leg_chain(side: Side, j: &LegJoints, m: &KinematicModel) -> LegChain {
    // y points left, so the right hip sits at negative y
    let hip = [0.0, -side.sign() * 0.5 * m.hip_spacing, 0.0];
    let mut r = mat_mul(&mat_mul(&rot_z(j.hip_yaw), &rot_x(j.hip_roll)), &rot_y(j.hip_pitch));
    let knee = add(&hip, &mat_vec(&r, &[0.0, 0.0, -m.thigh]));
    r = mat_mul(&r, &rot_y(j.knee));
    let ankle = add(&knee, &mat_vec(&r, &[0.0, 0.0, -m.shank]));
    r = mat_mul(&mat_mul(&r, &rot_y(j.ankle_pitch)), &rot_x(j.ankle_roll));
    let sole = add(&ankle, &mat_vec(&r, &[0.0, 0.0, -m.ankle_height]));
    LegChain { hip, knee, ankle, sole, foot_rot: r }
}

/// Poses the chain with the measured joints and tilts it about the support
/// sole center so the trunk attitude equals the measured one.
pub fn reconstruct_pose(f: &SensorFrame, m: &KinematicModel, s: &SupportState) -> BodyPose {
    let right = leg_chain(Side::Right, &f.joints.right_leg, m);
    let left = leg_chain(Side::Left, &f.joints.left_leg, m);
    let anchor = match s.side() {
        Side::Right => right.sole,
        Side::Left => left.sole,
    };
    let tilt = attitude_matrix(f.theta_roll, f.theta_pitch);
    let place = |p: &Vec3| mat_vec(&tilt, &sub(p, &anchor));
    let yaw_of = |r: &Mat3| {
        let w = mat_mul(&tilt, r);
        atan2(w[1][0], w[0][0])
    };
    BodyPose {
        neck: place(&[0.0, 0.0, m.trunk]),
        hip_mid: place(&[0.0, 0.0, 0.0]),
        hip: [place(&right.hip), place(&left.hip)],
        knee: [place(&right.knee), place(&left.knee)],
        ankle: [place(&right.ankle), place(&left.ankle)],
        sole: [place(&right.sole), place(&left.sole)],
        foot_yaw: [yaw_of(&right.foot_rot), yaw_of(&left.foot_rot)],
        support: s.side(),
    }
}

/// Ground-projected hip midpoint in the support footstep frame.
pub fn com_position(pose: &BodyPose) -> (f64, f64) {
    let sole = pose.sole_of(pose.support);
    let yaw = pose.foot_yaw_of(pose.support);
    Frame2::new(sole[0], sole[1], yaw).to_local(pose.hip_mid[0], pose.hip_mid[1])
}

/// CoM state in the footstep frame. Velocities are backward differences;
/// on the tick of an exchange they are carried over into the new frame
/// instead, and for `dt <= 0` the previous velocities are kept.
pub fn extract_com(pose: &BodyPose, s: &SupportState, prev: &ComState, dt: f64) -> ComState {
    let (cx, cy) = com_position(pose);
    if s.time_since_exchange == 0.0 {
        let (vx, vy) = s.relocation.rotate_inv(prev.vx, prev.vy);
        return ComState::new(cx, vx, cy, vy);
    }
    if dt <= 0.0 {
        return ComState::new(cx, prev.vx, cy, prev.vy);
    }
    ComState::new(cx, (cx - prev.cx) / dt, cy, (cy - prev.cy) / dt)
}

/// Switches the support role when the swing sole drops below the support
/// sole, provided the feet were more than `hysteresis` apart vertically since
/// the last switch. Returns the (possibly) updated state and whether a switch
/// happened.
pub fn detect_support_exchange(pose: &BodyPose, s: &SupportState, hysteresis: f64) -> (SupportState, bool) {
    let support_side = s.side();
    let support = pose.sole_of(support_side);
    let swing = pose.sole_of(support_side.opposite());
    let mut next = *s;
    if (swing[2] - support[2]).abs() > hysteresis {
        next.armed = true;
    }
    if !(next.armed && swing[2] < support[2]) {
        return (next, false);
    }
    let old = Frame2::new(support[0], support[1], pose.foot_yaw_of(support_side));
    let (dx, dy) = old.to_local(swing[0], swing[1]);
    let relocation = Frame2::new(dx, dy, pose.foot_yaw_of(support_side.opposite()) - old.yaw);
    next.lambda = -s.lambda;
    next.frame = s.frame.compose(&relocation);
    next.relocation = relocation;
    next.time_since_exchange = 0.0;
    next.armed = false;
    (next, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOutput {
    pub com: ComState,
    pub support: SupportState,
    pub pose: BodyPose,
    pub exchanged: bool,
}

/// Sequential estimator over a stream of sensor frames.
#[derive(Debug, Clone)]
pub struct StateEstimator {
    pub model: KinematicModel,
    pub hysteresis: f64,
    support: SupportState,
    com: ComState,
    last_timestamp: Option<f64>,
}

impl StateEstimator {
    pub fn new(model: KinematicModel, hysteresis: f64, initial_support: f64) -> Self {
        Self {
            model,
            hysteresis,
            support: SupportState::new(initial_support),
            com: ComState::default(),
            last_timestamp: None,
        }
    }

    pub fn support(&self) -> &SupportState {
        &self.support
    }

    pub fn com(&self) -> &ComState {
        &self.com
    }

    pub fn tick(&mut self, f: &SensorFrame) -> Result<EstimatorOutput, EstimationError> {
        let dt = match self.last_timestamp {
            Some(t) if f.timestamp <= t => return Err(EstimationError::NonIncreasingTimestamp),
            Some(t) => f.timestamp - t,
            None => 0.0,
        };
        let mut support = self.support;
        if self.last_timestamp.is_some() {
            support.time_since_exchange += dt;
        }
        let pose = reconstruct_pose(f, &self.model, &support);
        let (support, exchanged) = detect_support_exchange(&pose, &support, self.hysteresis);
        let pose = if exchanged { reconstruct_pose(f, &self.model, &support) } else { pose };
        let prev = if self.last_timestamp.is_some() {
            self.com
        } else {
            let (cx, cy) = com_position(&pose);
            ComState::new(cx, 0.0, cy, 0.0)
        };
        let com = extract_com(&pose, &support, &prev, dt);
        self.support = support;
        self.com = com;
        self.last_timestamp = Some(f.timestamp);
        Ok(EstimatorOutput { com, support, pose, exchanged })
    }
}
