use matchmarket::generate::{random_feasible_matching, random_strict_prefs, random_weights};
use matchmarket::{
    blocking_pair, enumerate_stable, greedy_matching, gs_propose, matched_payoff, max_weight_matching, payoff_table,
    pricing_defaults_natural, run, transfer, AgentId, MarketShape, PreferenceTable, PreferenceTable64, RuleRegime64,
    Scenario64, Side, WeightMatrix64, DEFAULT_ENUMERATION_BUDGET,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance() -> impl Strategy<Value = PreferenceTable64> {
    (1usize..=5, 1usize..=4, any::<u64>()).prop_map(|(n, l, seed)| {
        let shape = MarketShape::new(n, l.min(n)).unwrap();
        random_strict_prefs(&mut ChaCha8Rng::seed_from_u64(seed), shape, 0.01).unwrap()
    })
}

fn rules(mu: &PreferenceTable64) -> Vec<RuleRegime64> {
    let pricing = pricing_defaults_natural(1.0, mu.shape().n_providers).unwrap();
    vec![
        RuleRegime64::Zero,
        RuleRegime64::Proportional { gamma: 0.25 },
        RuleRegime64::Balanced,
        pricing.rule(),
    ]
}

/// Largest total over every injective provider assignment.
fn brute_force_max(w: &WeightMatrix64) -> f64 {
    fn go(w: &WeightMatrix64, p: usize, used: &mut Vec<bool>) -> f64 {
        let shape = w.shape();
        if p == shape.n_providers {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for u in 0..shape.n_users {
            if !used[u] {
                used[u] = true;
                best = best.max(w.get(u, p) + go(w, p + 1, used));
                used[u] = false;
            }
        }
        best
    }
    go(w, 0, &mut vec![false; w.shape().n_users])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn deferred_acceptance_is_stable_and_side_optimal(mu in instance()) {
        for rule in rules(&mu) {
            let v = payoff_table(&rule, &mu).unwrap();
            let set = enumerate_stable(&v, DEFAULT_ENUMERATION_BUDGET).unwrap();
            for side in [Side::Provider, Side::User] {
                let m = gs_propose(&v, side).unwrap();
                prop_assert!(blocking_pair(&m, &v).unwrap().is_none());
                prop_assert!(set.contains(&m));
                for other in set.iter() {
                    for a in v.shape().agents() {
                        let ours = matched_payoff(&v, &m, a);
                        let theirs = matched_payoff(&v, other, a);
                        if a.side == side {
                            prop_assert!(ours >= theirs);
                        } else {
                            prop_assert!(ours <= theirs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transfers_are_zero_sum(mu in instance()) {
        for rule in rules(&mu) {
            for u in 0..mu.shape().n_users {
                for p in 0..mu.shape().n_providers {
                    let (a, b) = (AgentId::user(u), AgentId::provider(p));
                    let sum = transfer(&rule, &mu, a, Some(b)).unwrap() + transfer(&rule, &mu, b, Some(a)).unwrap();
                    prop_assert!(sum.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn full_cost_makes_everything_stable(mu in instance(), seed in any::<u64>()) {
        let v = payoff_table(&RuleRegime64::Proportional { gamma: 1.0 }, &mu).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let m = random_feasible_matching(&mut rng, mu.shape());
            prop_assert!(blocking_pair(&m, &v).unwrap().is_none());
        }
    }

    #[test]
    fn assignment_and_greedy(n in 1usize..=6, l in 1usize..=6, seed in any::<u64>()) {
        let shape = MarketShape::new(n, l.min(n)).unwrap();
        let w: WeightMatrix64 = random_weights(&mut ChaCha8Rng::seed_from_u64(seed), shape);
        let (m, total) = max_weight_matching(&w);
        let best = brute_force_max(&w);
        prop_assert!((total - best).abs() < 1e-12);
        prop_assert!((w.total(&m) - total).abs() < 1e-12);
        let g = greedy_matching(&w).unwrap();
        prop_assert!(w.total(&g) >= 0.5 * best);
    }

    #[test]
    fn single_precision_agrees(mu in instance()) {
        let narrow: PreferenceTable<f32> = PreferenceTable::from_fn(mu.shape(), |a, b| mu.row(a)[b.index] as f32);
        for side in [Side::Provider, Side::User] {
            prop_assert_eq!(gs_propose(&narrow, side).unwrap(), gs_propose(&mu, side).unwrap());
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let mu = random_strict_prefs(&mut ChaCha8Rng::seed_from_u64(3), MarketShape::new(4, 3).unwrap(), 0.05).unwrap();
    let scenario = Scenario64::new(mu, RuleRegime64::Balanced, 0.25, 3.0, 300, 11);
    let a = run(&scenario).unwrap();
    let b = run(&scenario).unwrap();
    assert_eq!(a.records.len(), 300);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.matching, y.matching);
        assert_eq!(x.payoffs, y.payoffs);
    }
    assert!(a.learners.counts_symmetric());
    let other = run(&Scenario64 { seed: 12, ..scenario }).unwrap();
    assert!(a.records.iter().zip(&other.records).any(|(x, y)| x.payoffs != y.payoffs));
}

#[test]
fn counts_track_the_matching_history() {
    let mu = random_strict_prefs(&mut ChaCha8Rng::seed_from_u64(8), MarketShape::new(3, 2).unwrap(), 0.05).unwrap();
    let trace = run(&Scenario64::new(mu, RuleRegime64::Zero, 0.1, 3.0, 200, 1)).unwrap();
    for u in 0..3 {
        for p in 0..2 {
            let times = trace.records.iter().filter(|r| r.matching.user_of(p) == u).count() as u64;
            let count = trace.learners.count(AgentId::provider(p), AgentId::user(u)).unwrap();
            assert_eq!(count, times + trace.scenario.warm_start);
        }
    }
}
