use femtoho::sim::{run_unnecessary_handover_experiment, sweep_threshold_time, ScenarioConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn counts_are_conserved(seed in any::<u64>(), faps in 1u32..12, trials in 1u64..400, t in 0.0..60.0f64) {
        let c = ScenarioConfig { num_faps: faps, trials, seed, ..ScenarioConfig::default() }.with_min_dwell(t);
        let s = run_unnecessary_handover_experiment(&c).unwrap();
        prop_assert_eq!(s.entries, trials);
        prop_assert_eq!(s.entries, s.handovers + s.rejected());
        prop_assert_eq!(s.handovers, s.necessary + s.unnecessary_return + s.unnecessary_termination);
        prop_assert!(s.unnecessary() <= s.handovers);
        prop_assert!(s.return_handovers <= s.handovers);
        if let Some(f) = s.unnecessary_fraction() {
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(s.ci95_halfwidth().unwrap() >= 0.0);
        }
    }

    #[test]
    fn handover_counts_shrink_with_threshold_time(seed in any::<u64>(), t in 0.0..30.0f64, dt in 0.0..30.0f64) {
        let c = ScenarioConfig { num_faps: 3, trials: 300, seed, ..ScenarioConfig::default() };
        let rows = sweep_threshold_time(&c, &[t, t + dt]).unwrap();
        prop_assert!(rows[1].1.handovers <= rows[0].1.handovers);
        prop_assert_eq!(rows[0].1.entries, rows[1].1.entries);
    }
}

#[test]
fn access_point_count_leaves_fraction_unchanged() {
    let trials = 150_000;
    let one = ScenarioConfig { num_faps: 1, trials, seed: 1, ..ScenarioConfig::default() };
    let many = ScenarioConfig { num_faps: 150, trials, seed: 2, ..ScenarioConfig::default() };
    let a = run_unnecessary_handover_experiment(&one).unwrap();
    let b = run_unnecessary_handover_experiment(&many).unwrap();
    assert_eq!(a.entries, b.entries);
    let (fa, fb) = (a.unnecessary_fraction().unwrap(), b.unnecessary_fraction().unwrap());
    let se = ((fa * (1.0 - fa)) / a.handovers as f64 + (fb * (1.0 - fb)) / b.handovers as f64).sqrt();
    assert!((fa - fb).abs() < 4.0 * se, "1 ap {fa} vs 150 aps {fb}");
}

#[test]
fn thread_count_does_not_change_results() {
    let c = ScenarioConfig { trials: 30_000, ..ScenarioConfig::default() };
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = serial.install(|| run_unnecessary_handover_experiment(&c).unwrap());
    let b = run_unnecessary_handover_experiment(&c).unwrap();
    assert_eq!(a, b);
}
