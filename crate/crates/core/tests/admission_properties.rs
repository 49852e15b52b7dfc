use femtoho::admission::{decide, CacThresholds, CirReadings, HandoverContext};
use femtoho::mobility::{residence_time, FemtocellGeometry, MobilityParams, KMH};
use femtoho::sim::{substream, trial_outcomes, Classification, ScenarioConfig};
use proptest::prelude::*;

fn context() -> impl Strategy<Value = HandoverContext> {
    (
        0.0..200.0f64,
        0.0..10.0f64,
        proptest::option::of((-20.0..20.0f64, -20.0..20.0f64)),
    )
        .prop_map(|(dwell, v, cir)| HandoverContext {
            predicted_dwell: dwell,
            velocity: v,
            cir: cir.map(|(femto, macro_cell)| CirReadings { femto, macro_cell }),
        })
}

#[test]
fn every_factor_combination_multiplies_out() {
    let th = CacThresholds {
        min_dwell: 10.0,
        ..CacThresholds::default()
    };
    for bits in 0u8..8 {
        let (s, v, c) = (bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
        let ctx = HandoverContext {
            predicted_dwell: if s { 15.0 } else { 5.0 },
            velocity: if v { 0.3 } else { 5.0 },
            cir: Some(if c {
                CirReadings { femto: 3.0, macro_cell: 1.0 }
            } else {
                CirReadings { femto: -6.0, macro_cell: -2.0 }
            }),
        };
        let d = decide(&ctx, &th);
        assert_eq!((d.signal, d.velocity, d.cir), (s, v, c), "case {bits:03b}");
        assert_eq!(d.x(), u8::from(s && v && c), "case {bits:03b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn acceptance_shrinks_as_threshold_time_grows(ctx in context(), t1 in 0.0..60.0f64, dt in 0.0..60.0f64) {
        let lo = CacThresholds { min_dwell: t1, ..CacThresholds::default() };
        let hi = CacThresholds { min_dwell: t1 + dt, ..CacThresholds::default() };
        if decide(&ctx, &hi).accepted() {
            prop_assert!(decide(&ctx, &lo).accepted());
        }
    }

    #[test]
    fn zero_threshold_time_never_blocks_on_signal(ctx in context()) {
        prop_assert!(decide(&ctx, &CacThresholds::default()).signal);
    }

    #[test]
    fn residence_decreases_with_speed_and_angle(
        v in 0.01..5.0f64, dv in 0.001..5.0f64, a in 0.0..1.5f64, da in 0.001..0.07f64,
    ) {
        let geom = FemtocellGeometry::default();
        let at = |velocity: f64, entry_angle: f64| {
            residence_time(&geom, &femtoho::mobility::MobilityDraw { velocity, entry_angle, call_remaining: 1.0 }).unwrap()
        };
        prop_assert!(at(v + dv, a) < at(v, a));
        prop_assert!(at(v, a + da) < at(v, a));
        prop_assert!(at(v, -a) == at(v, a));
    }

    #[test]
    fn accepted_set_is_nested_under_common_random_numbers(seed in any::<u64>(), t in 0.0..40.0f64, dt in 0.1..40.0f64) {
        let base = ScenarioConfig { num_faps: 2, trials: 200, seed, ..ScenarioConfig::default() };
        for fap in 0..base.num_faps {
            let lo = trial_outcomes(&base.with_min_dwell(t), fap).unwrap();
            let hi = trial_outcomes(&base.with_min_dwell(t + dt), fap).unwrap();
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert_eq!(a.residence, b.residence);
                if b.classification != Classification::NotPerformed {
                    prop_assert_eq!(a.classification, b.classification);
                }
            }
        }
    }
}

/// P(2 r cos θ / v < w) with v ~ Exp(mean m), θ ~ U(-π/2, π/2) equals the
/// average of exp(-2 r cos θ / (w m)) over θ; integrated with Simpson's rule.
fn short_stay_probability(r: f64, mean_v: f64, window: f64) -> f64 {
    let n = 2000;
    let (a, b) = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    let h = (b - a) / n as f64;
    let f = |t: f64| (-2.0 * r * t.cos() / (window * mean_v)).exp();
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / (b - a)
}

#[test]
fn short_stay_share_matches_quadrature() {
    let geom = FemtocellGeometry::default();
    let sampler = MobilityParams::default().sampler();
    let mut rng = substream(42, 0);
    let samples = 1_000_000;
    let short = (0..samples)
        .filter(|_| residence_time(&geom, &sampler.sample(&mut rng)).unwrap() < 40.0)
        .count() as f64
        / samples as f64;
    let exact = short_stay_probability(10.0, KMH, 40.0);
    assert!((0.32..=0.43).contains(&short), "share {short}");
    let se = (exact * (1.0 - exact) / samples as f64).sqrt();
    assert!((short - exact).abs() < 4.0 * se, "mc {short} vs quadrature {exact}");
}
