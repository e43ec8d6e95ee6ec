mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use reordered::combinators::{product_name, sum_name};
use reordered::diagonal::{check_trace_with_header, pair, parse_opponent, run_diagonalization, unpair, Opponent};
use reordered::analysis::RhoSpec;
use reordered::names::{compare_tails, permutation_between, star, u_profile, Name, Permutation};
use reordered::sigma::{sigma_preservation_check, CombineMode};
use reordered::transfer::{greedy_dyadic_increment, split_name};
use reordered::Dyadic;

use common::*;

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (any::<i64>(), 0u64..100).prop_map(|(m, e)| Dyadic::new(BigInt::from(m), e))
}

fn list(max_len: usize, top: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=top, 0..=max_len)
}

fn list_with_permutation(max_len: usize, top: u64) -> impl Strategy<Value = (Vec<u64>, Vec<usize>)> {
    list(max_len, top).prop_flat_map(|f| {
        let idx: Vec<usize> = (0..f.len()).collect();
        (Just(f), Just(idx).prop_shuffle())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_operations_match_rationals(a in dyadic(), b in dyadic()) {
        let (ra, rb) = (dyadic_value(&a), dyadic_value(&b));
        prop_assert_eq!(dyadic_value(&(&a + &b)), &ra + &rb);
        prop_assert_eq!(dyadic_value(&(&a - &b)), &ra - &rb);
        prop_assert_eq!(dyadic_value(&(&a * &b)), &ra * &rb);
        prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn display_round_trips(a in dyadic()) {
        let back: Dyadic = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn profile_is_permutation_invariant((f, map) in list_with_permutation(24, 12)) {
        let g = Permutation::from_map(map).unwrap().apply(&f);
        let pf = u_profile(&mut Name::from_list("f", f.clone()), 13, f.len()).unwrap();
        let pg = u_profile(&mut Name::from_list("g", g), 13, f.len()).unwrap();
        for n in 0..=13 {
            prop_assert_eq!(pf.count(n), pg.count(n));
            prop_assert_eq!(pf.count(n), counts(&f).get(&n).copied().unwrap_or(0));
        }
    }

    #[test]
    fn star_is_sorted_with_the_same_profile(f in list(24, 12)) {
        let mut s = star(&mut Name::from_list("f", f.clone()), f.len()).unwrap();
        let sorted = s.prefix_up_to(f.len()).unwrap().to_vec();
        prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(counts(&sorted), counts(&f));
    }

    #[test]
    fn recovered_permutation_recomposes((f, map) in list_with_permutation(24, 6)) {
        let g = Permutation::from_map(map).unwrap().apply(&f);
        let tau = permutation_between(&f, &g).unwrap();
        prop_assert_eq!(tau.apply(&f), g);
    }

    #[test]
    fn sorted_tails_are_smallest((f, map) in list_with_permutation(16, 20), n in 0usize..17) {
        let sigma = Permutation::from_map(map).unwrap();
        let (lhs, rhs) = compare_tails(&f, &sigma, n).unwrap();
        prop_assert!(lhs <= rhs);
        if n == 0 {
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pairing_is_a_bijection(i in 0u64..1 << 20, j in 0u64..1 << 20) {
        prop_assert_eq!(unpair(pair(i, j)), (i, j));
    }

    #[test]
    fn sums_add_profiles(f in list(20, 10), g in list(20, 10)) {
        let mut h = sum_name(Name::from_list("f", f.clone()), Name::from_list("g", g.clone()));
        let hv = h.prefix_up_to(100).unwrap().to_vec();
        let (cf, cg, ch) = (counts(&f), counts(&g), counts(&hv));
        for n in 0..=10 {
            let at = |m: &std::collections::BTreeMap<u64, u64>| m.get(&n).copied().unwrap_or(0);
            prop_assert_eq!(at(&ch), at(&cf) + at(&cg));
        }
    }

    #[test]
    fn products_convolve_profiles(f in list(10, 6), g in list(10, 6)) {
        let mut h = product_name(Name::from_list("f", f.clone()), Name::from_list("g", g.clone()));
        let hv = h.prefix_up_to(200).unwrap().to_vec();
        prop_assert_eq!(hv.len(), f.len() * g.len());
        let uf: Vec<u64> = (0..=6).map(|n| counts(&f).get(&n).copied().unwrap_or(0)).collect();
        let ug: Vec<u64> = (0..=6).map(|n| counts(&g).get(&n).copied().unwrap_or(0)).collect();
        for n in 0..=12usize {
            prop_assert_eq!(counts(&hv).get(&(n as u64)).copied().unwrap_or(0), convolution(&uf, &ug, n));
        }
        prop_assert_eq!(sum_exponents(&hv), sum_exponents(&f) * sum_exponents(&g));
    }

    #[test]
    fn greedy_lands_below_target(cur in 0i64..1 << 20, gap in 0i64..1 << 24, e in 16u64..40, slack in 0u64..48) {
        let current = Dyadic::new(BigInt::from(cur), 20);
        let target = &current + &Dyadic::new(BigInt::from(gap), e);
        let emitted = greedy_dyadic_increment(&current, &target, slack).unwrap();
        let landed = dyadic_value(&current) + sum_exponents(&emitted);
        let t = dyadic_value(&target);
        prop_assert!(landed <= t);
        prop_assert!(landed > &t - pow2(-(slack as i64)));
    }

    #[test]
    fn splitting_conserves_profiles(f in list(70, 30)) {
        let r = |n: u64| 8u64.pow(n as u32 + 1);
        let out = split_name(&mut Name::from_list("f", f.clone()), &r, 100).unwrap();
        let mut joined = [out.g_values.clone(), out.h_values.clone()].concat();
        joined.sort();
        let mut sorted = f.clone();
        sorted.sort();
        prop_assert_eq!(joined, sorted);
        prop_assert!(out.report.holds());
    }

    #[test]
    fn sum_preserves_profiles_in_sigma_check(f in list(30, 8), g in list(30, 8)) {
        let report = sigma_preservation_check(
            &mut Name::from_list("f", f),
            &mut Name::from_list("g", g),
            CombineMode::Sum,
            8,
            10,
        );
        if let Ok(report) = report {
            prop_assert!(report.identity_holds && report.bound_holds);
        }
    }

    #[test]
    fn tail_oracle_matches_partial_sums(c0 in -3i64..4, c1 in 0i64..4, c2 in 0i64..3, m in 0u64..12) {
        // exact: the brute-force head plus the closed-form rest is the closed-form tail
        let coeffs: Vec<BigRational> = [c0, c1, c2].iter().map(|&c| q(c)).collect();
        let partial = poly_partial(&coeffs, m, 200);
        let rest = poly_tail(&coeffs, m + 200);
        prop_assert_eq!(partial + rest, poly_tail(&coeffs, m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn honest_runs_check_clean(cells in prop::collection::vec((1u64..12, 0u64..150), 1..5), delay in 0u64..6) {
        let text = cells.iter().map(|(v, t)| format!("{v}@{t}")).collect::<Vec<_>>().join(",");
        let opponents: Vec<Box<dyn Opponent>> = vec![
            parse_opponent(&format!("table({text})")).unwrap(),
            parse_opponent(&format!("echo({delay})")).unwrap(),
        ];
        let run = run_diagonalization(&opponents, &RhoSpec::One, 400).unwrap();
        let report = check_trace_with_header(&run.trace, &opponents).unwrap();
        prop_assert!(report.ok(), "{:?}", report.violations);
        prop_assert!(sum_exponents(&run.values) <= q(4));
    }
}
