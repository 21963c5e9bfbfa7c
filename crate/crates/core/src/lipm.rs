//! Linear inverted pendulum model.
//!
//! A point mass at constant height obeys `x'' = C^2 (x - z)` where `z` is the
//! pendulum base (ZMP). Everything in this module is closed form: forward
//! prediction, the inverse "when does it get there" queries, orbital energy,
//! and the two-axis predictor with a constant ZMP offset.

use crate::math::{abs, cosh, ln, sinh, sqrt};

/// Pendulum constant and the physical quantities it is usually derived from.
///
/// `c` is stored rather than recomputed because it is normally identified
/// from walking data and need not equal `sqrt(g / h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PendulumParams {
    /// Pendulum constant, 1/s.
    pub c: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
    /// Nominal CoM height, m.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipmError {
    NonPositiveConstant,
    NonPositiveHeight,
    NonFinite,
}

impl core::fmt::Display for LipmError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LipmError::NonPositiveConstant => f.write_str("pendulum constant must be positive"),
            LipmError::NonPositiveHeight => f.write_str("CoM height and gravity must be positive"),
            LipmError::NonFinite => f.write_str("pendulum parameters must be finite"),
        }
    }
}

impl PendulumParams {
    pub const STANDARD_GRAVITY: f64 = 9.81;

    /// `C = sqrt(g / h)`.
    pub fn from_height(g: f64, h: f64) -> Result<Self, LipmError> {
        if !g.is_finite() || !h.is_finite() {
            return Err(LipmError::NonFinite);
        }
        if g <= 0.0 || h <= 0.0 {
            return Err(LipmError::NonPositiveHeight);
        }
        Ok(Self { c: sqrt(g / h), g, h })
    }

    /// Uses an experimentally fitted constant; `g` and `h` are kept for reference.
    pub fn with_constant(c: f64, g: f64, h: f64) -> Result<Self, LipmError> {
        let p = Self { c, g, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LipmError> {
        if !self.c.is_finite() || !self.g.is_finite() || !self.h.is_finite() {
            return Err(LipmError::NonFinite);
        }
        if self.c <= 0.0 {
            return Err(LipmError::NonPositiveConstant);
        }
        if self.g <= 0.0 || self.h <= 0.0 {
            return Err(LipmError::NonPositiveHeight);
        }
        Ok(())
    }
}

impl Default for PendulumParams {
    fn default() -> Self {
        let g = Self::STANDARD_GRAVITY;
        let c = 3.0;
        Self { c, g, h: g / (c * c) }
    }
}

/// One-dimensional pendulum state relative to the pendulum base.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State1D {
    /// Position, m.
    pub x: f64,
    /// Velocity, m/s.
    pub v: f64,
}

impl State1D {
    pub const fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }
}

/// CoM state in the current footstep frame (x forward, y left).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComState {
    pub cx: f64,
    pub vx: f64,
    pub cy: f64,
    pub vy: f64,
}

impl ComState {
    pub const fn new(cx: f64, vx: f64, cy: f64, vy: f64) -> Self {
        Self { cx, vx, cy, vy }
    }

    pub fn sagittal(&self) -> State1D {
        State1D::new(self.cx, self.vx)
    }

    pub fn lateral(&self) -> State1D {
        State1D::new(self.cy, self.vy)
    }

    pub fn from_axes(sagittal: State1D, lateral: State1D) -> Self {
        Self::new(sagittal.x, sagittal.v, lateral.x, lateral.v)
    }

    pub fn is_finite(&self) -> bool {
        self.cx.is_finite() && self.vx.is_finite() && self.cy.is_finite() && self.vy.is_finite()
    }

    /// Euclidean norm over all four components.
    pub fn distance(&self, other: &ComState) -> f64 {
        let d = [self.cx - other.cx, self.vx - other.vx, self.cy - other.cy, self.vy - other.vy];
        sqrt(d.iter().map(|e| e * e).sum())
    }

    /// Componentwise `b * self + (1 - b) * other`.
    pub fn blend(&self, other: &ComState, b: f64) -> ComState {
        let mix = |r: f64, m: f64| b * r + (1.0 - b) * m;
        ComState::new(mix(self.cx, other.cx), mix(self.vx, other.vx), mix(self.cy, other.cy), mix(self.vy, other.vy))
    }
}

/// ZMP offset within the support foot, m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZmpOffset {
    pub zx: f64,
    pub zy: f64,
}

impl ZmpOffset {
    pub const ZERO: ZmpOffset = ZmpOffset { zx: 0.0, zy: 0.0 };

    pub const fn new(zx: f64, zy: f64) -> Self {
        Self { zx, zy }
    }
}

/// `x(t) = x0 cosh(Ct) + (v0 / C) sinh(Ct)`.
pub fn predict_pos(s: State1D, p: &PendulumParams, t: f64) -> f64 {
    let ct = p.c * t;
    s.x * cosh(ct) + s.v / p.c * sinh(ct)
}

/// `v(t) = x0 C sinh(Ct) + v0 cosh(Ct)`.
pub fn predict_vel(s: State1D, p: &PendulumParams, t: f64) -> f64 {
    let ct = p.c * t;
    s.x * p.c * sinh(ct) + s.v * cosh(ct)
}

pub fn predict(s: State1D, p: &PendulumParams, t: f64) -> State1D {
    let ct = p.c * t;
    let (ch, sh) = (cosh(ct), sinh(ct));
    State1D::new(s.x * ch + s.v / p.c * sh, s.x * p.c * sh + s.v * ch)
}

/// `E = (v^2 - C^2 x^2) / 2`. Positive lateral energy means the mass passes
/// over the base instead of turning around.
pub fn orbital_energy(s: State1D, p: &PendulumParams) -> f64 {
    // factored: no cancellation between two large squares far out on an orbit
    0.5 * (s.v - p.c * s.x) * (s.v + p.c * s.x)
}

/// Up to two non-negative arrival times, ascending.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Arrivals {
    times: [f64; 2],
    len: usize,
}

impl Arrivals {
    fn push(&mut self, t: f64) {
        if self.len == 2 {
            return;
        }
        // double roots come back twice from the quadratic
        if self.len == 1 && abs(self.times[0] - t) <= 1e-12 {
            return;
        }
        self.times[self.len] = t;
        self.len += 1;
        if self.len == 2 && self.times[1] < self.times[0] {
            self.times.swap(0, 1);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.times[..self.len]
    }

    pub fn first(&self) -> Option<f64> {
        self.as_slice().first().copied()
    }

    /// Smallest arrival strictly later than `after`.
    pub fn first_after(&self, after: f64) -> Option<f64> {
        self.as_slice().iter().copied().find(|&t| t > after)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Roots `u > 0` of `a u^2 - 2 m u + k = 0`, in the cancellation-free form.
fn positive_roots(a: f64, m: f64, k: f64) -> [Option<f64>; 2] {
    let scale = m * m + abs(a * k);
    if scale == 0.0 {
        return [None, None];
    }
    if abs(a) <= 1e-14 * sqrt(scale) {
        // degenerates to the linear equation -2 m u + k = 0
        let u = if m != 0.0 { k / (2.0 * m) } else { f64::NAN };
        return [(u > 0.0 && u.is_finite()).then_some(u), None];
    }
    let mut disc = m * m - a * k;
    if disc < 0.0 {
        if disc < -1e-12 * scale {
            return [None, None];
        }
        disc = 0.0;
    }
    let sign = if m >= 0.0 { 1.0 } else { -1.0 };
    let q = m + sign * sqrt(disc);
    let keep = |u: f64| (u > 0.0 && u.is_finite()).then_some(u);
    if q == 0.0 {
        return [None, None];
    }
    [keep(q / a), keep(k / q)]
}

const ROOT_NEG_SLACK: f64 = 1e-12;

fn collect_arrivals(roots: [Option<f64>; 2], p: &PendulumParams, check: impl Fn(f64) -> bool) -> Arrivals {
    let mut out = Arrivals::default();
    let mut ts = [f64::NAN; 2];
    for (slot, u) in ts.iter_mut().zip(roots) {
        if let Some(u) = u {
            let t = ln(u) / p.c;
            if t >= -ROOT_NEG_SLACK && check(t.max(0.0)) {
                *slot = t.max(0.0);
            }
        }
    }
    for t in ts {
        if !t.is_nan() {
            out.push(t);
        }
    }
    out
}

/// All non-negative times at which the pendulum passes `x_target`.
pub fn position_arrivals(x_target: f64, s: State1D, p: &PendulumParams) -> Arrivals {
    let c1 = s.x + s.v / p.c;
    let c2 = s.x - s.v / p.c;
    let tol = 1e-9 * (abs(x_target) + abs(s.x) + abs(s.v) / p.c) + 1e-15;
    collect_arrivals(positive_roots(c1, x_target, c2), p, |t| {
        abs(predict_pos(s, p, t) - x_target) <= tol * cosh(p.c * t)
    })
}

/// All non-negative times at which the pendulum has velocity `v_target`.
pub fn velocity_arrivals(v_target: f64, s: State1D, p: &PendulumParams) -> Arrivals {
    let c1 = s.x + s.v / p.c;
    let c2 = s.x - s.v / p.c;
    let tol = 1e-9 * (abs(v_target) + abs(s.x) * p.c + abs(s.v)) + 1e-15;
    collect_arrivals(positive_roots(c1 * p.c, v_target, -c2 * p.c), p, |t| {
        abs(predict_vel(s, p, t) - v_target) <= tol * cosh(p.c * t)
    })
}

/// Smallest non-negative time at which the pendulum reaches `x_target`, or
/// `None` if it never does.
pub fn time_to_position(x_target: f64, s: State1D, p: &PendulumParams) -> Option<f64> {
    position_arrivals(x_target, s, p).first()
}

/// Smallest non-negative time at which the pendulum velocity equals
/// `v_target`, or `None` if it never does.
pub fn time_to_velocity(v_target: f64, s: State1D, p: &PendulumParams) -> Option<f64> {
    velocity_arrivals(v_target, s, p).first()
}

/// Predicts both axes with the base shifted by a constant ZMP offset.
///
/// The axes are uncoupled: the sagittal result depends only on `(cx, vx, zx)`
/// and the lateral result only on `(cy, vy, zy)`.
pub fn lipm_predict(c: &ComState, z: &ZmpOffset, p: &PendulumParams, t: f64) -> ComState {
    let sag = predict(State1D::new(c.cx - z.zx, c.vx), p, t);
    let lat = predict(State1D::new(c.cy - z.zy, c.vy), p, t);
    ComState::new(sag.x + z.zx, sag.v, lat.x + z.zy, lat.v)
}
