use capstep::plant::{Plant, PlantEvent};
use capstep_core::control::{amplitude_to_step, RefConfig};
use capstep_core::cpg::SwingAmplitude;
use capstep_core::lipm::{lipm_predict, ComState, PendulumParams, ZmpOffset};
use capstep_core::StepParams;
use proptest::prelude::*;

fn plant(c: ComState, lambda: f64) -> Plant {
    Plant::new(c, lambda, PendulumParams::default(), RefConfig::default(), 0.0, vec![])
}

fn com() -> impl Strategy<Value = ComState> {
    (-0.1..0.1f64, -0.5..0.5f64, -0.1..0.1f64, -0.5..0.5f64).prop_map(|(a, b, c, d)| ComState::new(a, b, c, d))
}

proptest! {
    #[test]
    fn split_advances_match_one_prediction(c in com(), zx in -0.04..0.04f64,
                                           cuts in prop::collection::vec(0.001..0.05f64, 1..20)) {
        let mut pl = plant(c, 1.0);
        let z = ZmpOffset::new(zx, 0.01);
        pl.command(StepParams { amplitude: SwingAmplitude::ZERO, step_time: 10.0, zmp: z });
        let total: f64 = cuts.iter().sum();
        for dt in &cuts {
            pl.advance(*dt);
        }
        let want = lipm_predict(&c, &z, &PendulumParams::default(), total);
        prop_assert!(pl.state.com.distance(&want) < 1e-12 * (1.0 + want.distance(&ComState::default())));
    }

    #[test]
    fn exchange_places_the_commanded_step(c in com(), ax in -1.0..1.0f64, ay in -1.0..1.0f64,
                                          right in prop::bool::ANY, t in 0.0..0.3f64) {
        let lambda = if right { 1.0 } else { -1.0 };
        let a = SwingAmplitude::new(ax, ay, 0.0);
        let mut pl = plant(c, lambda);
        pl.command(StepParams { amplitude: a, step_time: t, zmp: ZmpOffset::ZERO });
        pl.advance(0.31);
        let ev = pl.drain_events();
        let step = ev.iter().find_map(|e| match e {
            PlantEvent::Exchange { step, lambda: l, .. } => Some((*step, *l)),
            _ => None,
        });
        let (step, l) = step.expect("one exchange");
        let want = amplitude_to_step(&a, lambda, &RefConfig::default());
        prop_assert_eq!(l, -lambda);
        prop_assert!((step.0 - want.0).abs() < 1e-15 && (step.1 - want.1).abs() < 1e-15);
        prop_assert_eq!(pl.state.foot, step);
    }
}
