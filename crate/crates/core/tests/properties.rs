use proptest::prelude::*;

use stable_mallows::cutpoints::{certified_cuts, count_stable_factored, exact_cuts, DecompositionMethod};
use stable_mallows::matching::{brute_force_stable, count_stable, enumerate_stable, gale_shapley, is_stable, Matching};
use stable_mallows::prefs::parse_prefs_json;
use stable_mallows::{IntInterval, MallowsParams, Person, PreferenceStructure, Role};

fn instance(max_n: usize) -> impl Strategy<Value = PreferenceStructure> {
    (0.05f64..0.95, 1..=max_n, any::<u64>(), -5i64..5).prop_map(|(q, n, seed, lo)| {
        let params = MallowsParams::new(q).unwrap();
        PreferenceStructure::sample(&params, IntInterval::one_to(n).unwrap(), seed).unwrap().shifted(lo)
    })
}

/// Rank of `m` in `w`'s list, larger meaning preferred.
fn rank(p: &PreferenceStructure, w: i64, m: i64) -> i64 {
    p.ranking(Person::woman(w)).unwrap().apply(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn small_instances_match_brute_force(p in instance(7)) {
        let all = brute_force_stable(&p).unwrap();
        prop_assert!(!all.is_empty());
        prop_assert_eq!(enumerate_stable(&p, usize::MAX, u64::MAX).unwrap(), all.clone());
        prop_assert_eq!(count_stable(&p, u64::MAX).unwrap().to_u64(), Some(all.len() as u64));
        let worst = gale_shapley(&p, Role::Man);
        let best = gale_shapley(&p, Role::Woman);
        for m in &all {
            for w in p.domain().iter() {
                let r = rank(&p, w, m.partner_of_woman(w).unwrap());
                prop_assert!(rank(&p, w, worst.partner_of_woman(w).unwrap()) <= r);
                prop_assert!(r <= rank(&p, w, best.partner_of_woman(w).unwrap()));
            }
        }
    }

    #[test]
    fn factored_counts_agree(p in instance(30)) {
        let direct = count_stable(&p, u64::MAX).unwrap();
        prop_assert!(direct.to_u64().unwrap() >= 1);
        for method in [DecompositionMethod::Certified, DecompositionMethod::Exact, DecompositionMethod::Auto] {
            prop_assert_eq!(count_stable_factored(&p, method, u64::MAX).unwrap(), direct.clone());
        }
        let exact = exact_cuts(&p);
        for c in certified_cuts(&p) {
            prop_assert!(exact.contains(&c));
        }
    }

    #[test]
    fn gale_shapley_is_stable(p in instance(25)) {
        for role in [Role::Man, Role::Woman] {
            prop_assert!(is_stable(&p, &gale_shapley(&p, role)).unwrap());
        }
    }

    #[test]
    fn crossings_balance(partners in Just((1..=30i64).collect::<Vec<_>>()).prop_shuffle(), lo in -10i64..10) {
        let n = partners.len() as i64;
        let shifted: Vec<i64> = partners.iter().map(|x| x + lo - 1).collect();
        let m = Matching::new(IntInterval::new(lo, lo + n - 1).unwrap(), shifted).unwrap();
        for c in lo..lo + n - 1 {
            let (a, b) = m.crossings(c);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn prefs_json_round_trip(p in instance(12), q in proptest::option::of(0.01f64..0.99), seed in proptest::option::of(any::<u64>())) {
        let text = p.to_json(q, seed);
        let (back, q2, seed2) = parse_prefs_json("mem", &text).unwrap();
        prop_assert_eq!(back, p);
        prop_assert_eq!(q2, q);
        prop_assert_eq!(seed2, seed);
    }
}
