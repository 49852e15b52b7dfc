use femtoho::queuing::{
    blocking_report, ctmc_oracle, erlang_b, handover_blocking, new_call_blocking, optimize_k,
    stationary_distribution, sweep_guard_threshold, GuardChannelParams, OptimizationCriterion,
};
use proptest::prelude::*;

/// Erlang-B from the explicit sum, in log space to survive large N.
fn erlang_b_direct(a: f64, n: usize) -> f64 {
    let log_term = |k: usize| k as f64 * a.ln() - (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let top = log_term(n);
    let denom: f64 = (0..=n).map(|k| (log_term(k) - top).exp()).sum();
    1.0 / denom
}

fn params() -> impl Strategy<Value = GuardChannelParams> {
    (1usize..=50)
        .prop_flat_map(|n| (Just(n), 0..=n, 0.0..5.0f64, 0.0..5.0f64, 0.05..2.0f64))
        .prop_map(|(n, k, nf, hm, mu)| GuardChannelParams::new(n, k, nf, hm, mu).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distribution_is_normalized(p in params()) {
        let d = stationary_distribution(&p);
        let sum: f64 = d.probabilities().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(d.probabilities().iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn product_form_matches_linear_solve(p in params()) {
        let d = stationary_distribution(&p);
        let o = ctmc_oracle(&p).unwrap();
        prop_assert!(d.max_abs_diff(&o) < 1e-10, "diff {}", d.max_abs_diff(&o));
    }

    #[test]
    fn no_guard_region_reduces_to_erlang_b(p in params()) {
        let p = p.with_guard_threshold(p.num_channels).unwrap();
        let a = p.offered_load();
        prop_assume!(a > 0.0);
        let pd = handover_blocking(&p);
        prop_assert!((pd - erlang_b(a, p.num_channels)).abs() < 1e-12);
        prop_assert!((pd - erlang_b_direct(a, p.num_channels)).abs() < 1e-10);
        prop_assert_eq!(pd, new_call_blocking(&p));
    }

    #[test]
    fn handover_blocking_never_exceeds_new_call_blocking(p in params()) {
        let r = blocking_report(&p);
        prop_assert!(r.handover_blocking <= r.new_call_blocking + 1e-15);
        prop_assert!((0.0..=1.0).contains(&r.utilization));
    }

    #[test]
    fn monotone_in_guard_threshold(p in params()) {
        let table = sweep_guard_threshold(&p).unwrap();
        for w in table.windows(2) {
            let (lo, hi) = (&w[0].report, &w[1].report);
            prop_assert!(hi.handover_blocking >= lo.handover_blocking - 1e-12);
            prop_assert!(hi.new_call_blocking <= lo.new_call_blocking + 1e-12);
            prop_assert!(hi.carried_load >= lo.carried_load - 1e-9);
        }
    }

    #[test]
    fn carried_load_balances_admitted_traffic(p in params()) {
        let d = stationary_distribution(&p);
        let r = blocking_report(&p);
        let admitted = p.new_call_rate * (1.0 - r.new_call_blocking)
            + p.handover_rate * (1.0 - r.handover_blocking);
        prop_assert!((d.carried_load() - admitted / p.service_rate).abs() < 1e-9 * (1.0 + d.carried_load()));
    }

    #[test]
    fn chosen_k_satisfies_target(p in params(), target in 0.0..1.0f64) {
        let table = sweep_guard_threshold(&p).unwrap();
        match optimize_k(&table, OptimizationCriterion::MaxKWithinTarget { target }) {
            Ok(choice) => {
                let pd = table[choice.guard_threshold].report.handover_blocking;
                prop_assert!(pd <= target);
                for row in &table[choice.guard_threshold + 1..] {
                    prop_assert!(row.report.handover_blocking > target);
                }
            }
            Err(_) => prop_assert!(table.iter().all(|r| r.report.handover_blocking > target)),
        }
    }
}

#[test]
fn erlang_b_recursion_matches_explicit_sum_on_grid() {
    for n in [1usize, 2, 5, 10, 40, 200] {
        for a in [0.1, 1.0, 4.8, 21.0, 150.0] {
            let (r, d) = (erlang_b(a, n), erlang_b_direct(a, n));
            assert!((r - d).abs() < 1e-10, "a={a} n={n}: {r} vs {d}");
        }
    }
}
