use core::f64::consts::PI;

use capstep_core::cpg::{
    advance_phase, compose_pose, leg_lift, leg_swing, unit_swing, CpgConfig, CpgGait, MotionPhase, Side, SwingAmplitude,
};
use proptest::prelude::*;

const EPS: f64 = 1e-12;

fn cfg() -> CpgConfig {
    CpgConfig::default()
}

#[test]
fn unit_swing_is_continuous_at_its_breakpoints() {
    let c = cfg();
    for mu in [c.k_mu0, c.k_mu1] {
        let d = (unit_swing(mu - EPS, &c) - unit_swing(mu + EPS, &c)).abs();
        assert!(d <= 1e-9, "jump {d} at {mu}");
    }
    // the phase wraps from just below pi to -pi
    let d = (unit_swing(PI - EPS, &c) - unit_swing(-PI, &c)).abs();
    assert!(d <= 1e-9, "jump {d} at the wrap");
}

#[test]
fn unit_swing_extremes() {
    let c = cfg();
    assert!((unit_swing(c.k_mu0, &c) - 1.0).abs() < 1e-15);
    assert!((unit_swing(c.k_mu1, &c) + 1.0).abs() < 1e-15);
    let mid = 0.5 * (c.k_mu0 + c.k_mu1);
    assert!(unit_swing(mid, &c).abs() < 1e-15);
}

#[test]
fn lift_pushes_in_support_and_lifts_in_swing() {
    let c = cfg();
    let a = SwingAmplitude::new(0.5, 0.0, 0.0);
    let push = leg_lift(-PI / 2.0, &a, &c);
    let lift = leg_lift(PI / 2.0, &a, &c);
    assert!((push + (c.k1 + 0.5 * c.k3)).abs() < 1e-15);
    assert!((lift - (c.k2 + 0.5 * c.k4)).abs() < 1e-15);
    assert_eq!(leg_lift(0.0, &a, &c), 0.0);
}

#[test]
fn legs_spread_apart_for_lateral_steps() {
    let c = cfg();
    let a = SwingAmplitude::new(0.0, 0.6, 0.0);
    let mid = 0.5 * (c.k_mu0 + c.k_mu1);
    let (r, _, _) = leg_swing(Side::Right, mid, &a, &c);
    let (l, _, _) = leg_swing(Side::Left, mid, &a, &c);
    assert!((r + 0.6 * c.k6).abs() < 1e-15);
    assert!((l - 0.6 * c.k6).abs() < 1e-15);
}

#[test]
fn zero_amplitude_stepping_in_place_is_symmetric() {
    let c = cfg();
    for i in 0..64 {
        let mu = -PI + i as f64 * PI / 32.0;
        let right = compose_pose(&MotionPhase::new(mu), &SwingAmplitude::ZERO, &c).joints;
        let left = compose_pose(&MotionPhase::new(mu + PI), &SwingAmplitude::ZERO, &c).joints;
        let (r, l) = (right.right_leg.to_array(), left.left_leg.to_array());
        for k in 0..6 {
            // the left leg half a cycle later mirrors the right one, roll and yaw flipped
            let want = if k == 0 || k == 1 || k == 5 { -r[k] } else { r[k] };
            assert!((l[k] - want).abs() < 1e-12, "mu={mu} joint {k}: {} vs {want}", l[k]);
        }
    }
}

#[test]
fn phase_reaches_the_boundary_after_step_time() {
    let c = cfg();
    let mut m = MotionPhase::new(-PI);
    let mut t = 0.32;
    let mut ticks = 0;
    loop {
        let adv = advance_phase(m, t, &c);
        m = adv.phase;
        ticks += 1;
        t -= c.rho;
        if adv.exchange_expected {
            break;
        }
        assert!(ticks < 100);
    }
    assert_eq!(ticks, 32);
    assert_eq!(m.mu, 0.0);
    assert_eq!(m.lambda, -1.0);
}

#[test]
fn whole_body_pose_changes_smoothly_over_a_stride() {
    let c = cfg();
    let mut gait = CpgGait::new(c);
    let a = SwingAmplitude::new(0.8, -0.5, 0.3);
    let mut prev = gait.tick(&a, 0.32).pose.joints.to_array();
    let mut exchanges = 0;
    let mut t = 0.31;
    for _ in 0..200 {
        let out = gait.tick(&a, t);
        t -= c.rho;
        if out.exchange_expected {
            exchanges += 1;
            t = 0.32;
        }
        let cur = out.pose.joints.to_array();
        let worst = prev.iter().zip(&cur).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        // pi/32 of phase per tick against joint slopes of at most a few rad/rad
        assert!(worst < 0.25, "joint jump {worst}");
        prev = cur;
    }
    assert!(exchanges >= 4);
}

fn amplitude() -> impl Strategy<Value = SwingAmplitude> {
    (-1.0..=1.0f64, -1.0..=1.0f64, -1.0..=1.0f64).prop_map(|(x, y, p)| SwingAmplitude::new(x, y, p))
}

proptest! {
    #[test]
    fn unit_swing_is_periodic_and_bounded(mu in -PI..PI) {
        let c = cfg();
        let z = unit_swing(mu, &c);
        prop_assert!((-1.0..=1.0).contains(&z));
        let again = compose_pose(&MotionPhase::new(mu + 2.0 * PI), &SwingAmplitude::ZERO, &c);
        let once = compose_pose(&MotionPhase::new(mu), &SwingAmplitude::ZERO, &c);
        for (a, b) in again.joints.to_array().iter().zip(once.joints.to_array()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn pose_is_continuous_in_phase(mu in -PI..PI, a in amplitude()) {
        let c = cfg();
        let h = 1e-7;
        let p0 = compose_pose(&MotionPhase::new(mu), &a, &c).joints.to_array();
        let p1 = compose_pose(&MotionPhase::new(mu + h), &a, &c).joints.to_array();
        for (x, y) in p0.iter().zip(p1) {
            prop_assert!((x - y).abs() < 1e-5, "{x} {y}");
        }
    }

    #[test]
    fn bounded_amplitudes_stay_within_joint_limits(mu in -PI..PI, a in amplitude()) {
        let c = cfg();
        let pose = compose_pose(&MotionPhase::new(mu), &a, &c);
        prop_assert!(!pose.clamped);
        prop_assert!(pose.joints.within(&c.limits), "{:?}", pose.joints);
    }
}
