use capstep_core::lipm::{
    lipm_predict, orbital_energy, position_arrivals, predict, predict_pos, predict_vel, time_to_position,
    time_to_velocity, velocity_arrivals, ComState, PendulumParams, State1D, ZmpOffset,
};
use proptest::prelude::*;

fn params() -> PendulumParams {
    PendulumParams::default()
}

/// Classical RK4 on `x'' = C^2 (x - z)`.
fn rk4(x: f64, v: f64, z: f64, c: f64, t: f64, steps: usize) -> (f64, f64) {
    let h = t / steps as f64;
    let f = |x: f64, v: f64| (v, c * c * (x - z));
    let (mut x, mut v) = (x, v);
    for _ in 0..steps {
        let (k1x, k1v) = f(x, v);
        let (k2x, k2v) = f(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        let (k3x, k3v) = f(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        let (k4x, k4v) = f(x + h * k3x, v + h * k3v);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (x, v)
}

/// Every sign change of `g` on a fine grid over `[0, t_max]`, refined by bisection.
fn bisect_roots(g: impl Fn(f64) -> f64, t_max: f64) -> Vec<f64> {
    let n = 4000;
    let mut roots = Vec::new();
    let mut prev = g(0.0);
    if prev == 0.0 {
        roots.push(0.0);
    }
    for i in 1..=n {
        let (a0, b0) = ((i - 1) as f64 * t_max / n as f64, i as f64 * t_max / n as f64);
        let cur = g(b0);
        if prev * cur < 0.0 {
            let (mut a, mut b) = (a0, b0);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if (g(m) < 0.0) == (g(a) < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = cur;
    }
    roots
}

#[test]
fn predict_matches_rk4_on_a_grid() {
    let p = params();
    for &(x, v, z) in &[(0.05, 0.0, 0.0), (-0.1, 0.4, 0.02), (0.0, -0.3, -0.04), (0.2, -0.6, 0.01)] {
        for &t in &[0.0, 0.1, 0.32, 0.7, 1.0] {
            let got = lipm_predict(&ComState::new(x, v, -x, v), &ZmpOffset::new(z, -z), &p, t);
            let (ox, ov) = rk4(x, v, z, p.c, t, 2000);
            let (oy, ovy) = rk4(-x, v, -z, p.c, t, 2000);
            assert!((got.cx - ox).abs() < 1e-9 && (got.vx - ov).abs() < 1e-9, "{x} {v} {z} {t}");
            assert!((got.cy - oy).abs() < 1e-9 && (got.vy - ovy).abs() < 1e-9);
        }
    }
}

#[test]
fn arrival_example_values() {
    let p = params();
    let t = time_to_position(0.0, State1D::new(0.1, -0.5), &p).unwrap();
    // x(t) = 0 gives tanh(Ct) = 3 x0 / v0 magnitude 0.6
    assert!((t - 0.6_f64.atanh() / 3.0).abs() < 1e-12);
    assert_eq!(time_to_velocity(1.0, State1D::new(0.0, 0.0), &p), None);
    assert_eq!(time_to_position(0.05, State1D::new(0.0, 0.0), &p), None);
}

#[test]
fn two_crossings_for_a_returning_pendulum() {
    let p = params();
    // comes in toward the base, turns at the apex and leaves again
    let s = State1D::new(0.1, -0.25);
    let a = position_arrivals(0.09, s, &p);
    assert_eq!(a.as_slice().len(), 2);
    let apex = time_to_velocity(0.0, s, &p).unwrap();
    assert!(a.as_slice()[0] < apex && apex < a.as_slice()[1]);
}

#[test]
fn energy_is_preserved_in_a_long_prediction() {
    let p = params();
    let s = State1D::new(0.03, -0.1);
    let e0 = orbital_energy(s, &p);
    let mut cur = s;
    for _ in 0..200 {
        cur = predict(cur, &p, 0.01);
    }
    assert!(((orbital_energy(cur, &p) - e0) / e0).abs() < 1e-9);
}

fn state() -> impl Strategy<Value = State1D> {
    (-0.3..0.3f64, -1.5..1.5f64).prop_map(|(x, v)| State1D::new(x, v))
}

proptest! {
    #[test]
    fn predict_is_a_flow(s in state(), t1 in 0.0..0.6f64, t2 in 0.0..0.6f64) {
        let p = params();
        let a = predict(predict(s, &p, t1), &p, t2);
        let b = predict(s, &p, t1 + t2);
        let scale = 1.0 + b.x.abs() + b.v.abs();
        prop_assert!((a.x - b.x).abs() < 1e-12 * scale);
        prop_assert!((a.v - b.v).abs() < 1e-12 * scale);
    }

    #[test]
    fn predict_runs_backwards(s in state(), t in 0.0..0.8f64) {
        let p = params();
        let back = predict(predict(s, &p, t), &p, -t);
        prop_assert!((back.x - s.x).abs() < 1e-10);
        prop_assert!((back.v - s.v).abs() < 1e-10);
    }

    #[test]
    fn energy_is_invariant(s in state(), t in 0.0..2.0f64) {
        let p = params();
        let e0 = orbital_energy(s, &p);
        let e1 = orbital_energy(predict(s, &p, t), &p);
        let scale = 0.5 * (s.v * s.v + p.c * p.c * s.x * s.x);
        prop_assert!((e1 - e0).abs() <= 1e-9 * scale.max(1e-12), "{e0} {e1}");
    }

    #[test]
    fn axes_are_uncoupled(c in (-0.2..0.2f64, -1.0..1.0f64, -0.2..0.2f64, -1.0..1.0f64),
                          dy in -0.1..0.1f64, t in 0.0..1.0f64) {
        let p = params();
        let c0 = ComState::new(c.0, c.1, c.2, c.3);
        let z = ZmpOffset::new(0.01, -0.01);
        let a = lipm_predict(&c0, &z, &p, t);
        let b = lipm_predict(&ComState { cy: c.2 + dy, ..c0 }, &z, &p, t);
        prop_assert_eq!(a.cx, b.cx);
        prop_assert_eq!(a.vx, b.vx);
    }

    #[test]
    fn position_arrivals_agree_with_bisection(s in state(), target in -0.3..0.3f64) {
        let p = params();
        let t_max = 1.5;
        let got: Vec<f64> = position_arrivals(target, s, &p)
            .as_slice().iter().copied().filter(|&t| t <= t_max).collect();
        for &t in &got {
            let x = predict_pos(s, &p, t);
            prop_assert!((x - target).abs() < 1e-9 * (1.0 + x.abs()), "t={t} x={x}");
        }
        // tangential touches have no sign change; they only show up on the
        // closed-form side
        for r in bisect_roots(|t| predict_pos(s, &p, t) - target, t_max) {
            if r < 1e-6 || r > t_max - 1e-6 {
                continue;
            }
            prop_assert!(got.iter().any(|&t| (t - r).abs() < 1e-7), "missing {r}, got {got:?}");
        }
    }

    #[test]
    fn velocity_arrivals_agree_with_bisection(s in state(), target in -1.5..1.5f64) {
        let p = params();
        let t_max = 1.5;
        let got: Vec<f64> = velocity_arrivals(target, s, &p)
            .as_slice().iter().copied().filter(|&t| t <= t_max).collect();
        for &t in &got {
            let v = predict_vel(s, &p, t);
            prop_assert!((v - target).abs() < 1e-9 * (1.0 + v.abs()), "t={t} v={v}");
        }
        for r in bisect_roots(|t| predict_vel(s, &p, t) - target, t_max) {
            if r < 1e-6 || r > t_max - 1e-6 {
                continue;
            }
            prop_assert!(got.iter().any(|&t| (t - r).abs() < 1e-7), "missing {r}, got {got:?}");
        }
    }

    #[test]
    fn first_arrival_is_the_earliest(s in state(), target in -0.3..0.3f64) {
        let p = params();
        let a = position_arrivals(target, s, &p);
        if let (Some(first), [t0, ..]) = (time_to_position(target, s, &p), a.as_slice()) {
            prop_assert_eq!(first, *t0);
            prop_assert!(a.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
