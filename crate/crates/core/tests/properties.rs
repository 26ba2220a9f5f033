use fairpay::algorithms::{algorithm1_additive, nsw_pipeline_additive, subadditive_baseline, NswOptions};
use fairpay::envy::{
    build_envy_graph, is_ef1, is_envy_free, is_envy_freeable, is_envy_freeable_by_permutation, min_subsidies,
    natural_transfers, EnvyFreeabilityWitness,
};
use fairpay::matching::{iterated_matching, reassign_bundles};
use fairpay::model::{social_welfare, Allocation, Instance, ItemSet, PaymentVector, ValuationClass};
use fairpay::oracles::enumerate::decode;
use fairpay::oracles::lp::{minimize, Constraint, LpOutcome, Relation};
use fairpay::oracles::{all_allocations, brute_nsw_opt, brute_sw_opt, gen_random, min_total_transfer};
use fairpay::Rational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn class_of(k: u8) -> ValuationClass {
    match k % 4 {
        0 => ValuationClass::Additive,
        1 => ValuationClass::Subadditive,
        2 => ValuationClass::MatroidRank,
        _ => ValuationClass::Monotone,
    }
}

fn random_allocation(n: usize, m: usize, code: u64) -> Allocation {
    let count = (n as u64).pow(m as u32);
    Allocation::new(m, decode(code % count, n, m)).unwrap()
}

/// Smallest subsidy agent `i` can get among all nonnegative envy-eliminating payments.
fn lp_min_subsidy(inst: &Instance<Rational>, alloc: &Allocation, i: usize) -> Rational {
    let g = build_envy_graph(inst, alloc);
    let n = inst.agents();
    let mut constraints = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let mut c = vec![q(0, 1); n];
                c[a] = q(1, 1);
                c[b] = q(-1, 1);
                constraints.push(Constraint {
                    coeffs: c,
                    relation: Relation::Ge,
                    rhs: g.weight(a, b).clone(),
                });
            }
        }
    }
    let mut cost = vec![q(0, 1); n];
    cost[i] = q(1, 1);
    match minimize(&cost, &constraints) {
        LpOutcome::Optimal { value, .. } => value,
        other => panic!("subsidy program not solved: {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characterizations_agree(seed in 0u64..10_000, class in 0u8..4, n in 1usize..=3, m in 1usize..=4) {
        let inst: Instance<Rational> = gen_random(n, m, class_of(class), seed).unwrap();
        for a in all_allocations(n, m).unwrap() {
            let cert = is_envy_freeable(&inst, &a);
            prop_assert_eq!(cert.verdict, is_envy_freeable_by_permutation(&inst, &a).unwrap());
            if let EnvyFreeabilityWitness::Potentials(l) = cert.witness {
                prop_assert!(is_envy_free(&inst, &a, &l).0);
            }
        }
    }

    #[test]
    fn envy_freeness_is_shift_invariant(seed in 0u64..10_000, code in any::<u64>(), shift in -50i64..50, den in 1i64..9) {
        let inst: Instance<Rational> = gen_random(3, 5, ValuationClass::Additive, seed).unwrap();
        let a = random_allocation(3, 5, code);
        let p: Vec<Rational> = (0..3).map(|i| q((seed as i64 + 7 * i) % 13 - 6, 8)).collect();
        let c = q(shift, den);
        let shifted: Vec<Rational> = p.iter().map(|x| x + c.clone()).collect();
        prop_assert_eq!(is_envy_free(&inst, &a, &p).0, is_envy_free(&inst, &a, &shifted).0);
    }

    #[test]
    fn scaling_preserves_verdicts(seed in 0u64..10_000, class in 0u8..4, code in any::<u64>(), num in 1i64..20, den in 1i64..20) {
        let inst: Instance<Rational> = gen_random(3, 5, class_of(class), seed).unwrap();
        let lambda = q(num, den);
        let scaled = inst.scale_by(&lambda);
        let a = random_allocation(3, 5, code);
        let (x, y) = (is_envy_freeable(&inst, &a), is_envy_freeable(&scaled, &a));
        prop_assert_eq!(x.verdict, y.verdict);
        prop_assert_eq!(is_ef1(&inst, &a), is_ef1(&scaled, &a));
        prop_assert_eq!(social_welfare(&scaled, &a, None), social_welfare(&inst, &a, None) * lambda.clone());
        match (x.witness, y.witness) {
            (EnvyFreeabilityWitness::Cycle(c), EnvyFreeabilityWitness::Cycle(d)) => {
                prop_assert_eq!(c.agents, d.agents);
                prop_assert_eq!(c.weight * lambda.clone(), d.weight);
            }
            (EnvyFreeabilityWitness::Potentials(_), EnvyFreeabilityWitness::Potentials(_)) => {
                let s = min_subsidies(&inst, &a).unwrap();
                let t = min_subsidies(&scaled, &a).unwrap();
                let s_scaled: Vec<Rational> = s.values().iter().map(|v| v * lambda.clone()).collect();
                prop_assert_eq!(s_scaled.as_slice(), t.values());
            }
            _ => prop_assert!(false, "witness kinds differ"),
        }
    }

    #[test]
    fn transfers_are_welfare_neutral(seed in 0u64..10_000, code in any::<u64>(), a in -20i64..20, b in -20i64..20) {
        let inst: Instance<Rational> = gen_random(3, 4, ValuationClass::Monotone, seed).unwrap();
        let alloc = random_allocation(3, 4, code);
        let t = PaymentVector::transfer(vec![q(a, 3), q(b, 5), q(-a, 3) - q(b, 5)]).unwrap();
        prop_assert_eq!(social_welfare(&inst, &alloc, Some(&t)), social_welfare(&inst, &alloc, None));
    }

    #[test]
    fn subsidies_are_minimal(seed in 0u64..10_000, class in 0u8..4, code in any::<u64>()) {
        let inst: Instance<Rational> = gen_random(3, 4, class_of(class), seed).unwrap();
        let (a, _) = reassign_bundles(&inst, &random_allocation(3, 4, code));
        let s = min_subsidies(&inst, &a).unwrap();
        for i in 0..3 {
            prop_assert_eq!(s.values()[i].clone(), lp_min_subsidy(&inst, &a, i));
        }
    }

    #[test]
    fn reassignment_is_envy_freeable_and_never_loses_welfare(seed in 0u64..10_000, class in 0u8..4, n in 2usize..=4, code in any::<u64>()) {
        let m = 6;
        let inst: Instance<Rational> = gen_random(n, m, class_of(class), seed).unwrap();
        let base = random_allocation(n, m, code);
        let (a, _) = reassign_bundles(&inst, &base);
        prop_assert!(is_envy_freeable(&inst, &a).verdict);
        prop_assert!(social_welfare(&inst, &a, None) >= social_welfare(&inst, &base, None));
    }

    #[test]
    fn min_transfer_beats_natural_transfers(seed in 0u64..10_000, class in 0u8..4, n in 2usize..=5, code in any::<u64>()) {
        let inst: Instance<Rational> = gen_random(n, 6, class_of(class), seed).unwrap();
        let (a, _) = reassign_bundles(&inst, &random_allocation(n, 6, code));
        let natural = natural_transfers(&min_subsidies(&inst, &a).unwrap());
        let opt = min_total_transfer(&inst, &a).unwrap();
        prop_assert!(opt.total <= natural.total());
        prop_assert!(is_envy_free(&inst, &a, opt.transfers.values()).0);
    }

    #[test]
    fn envy_free_results_keep_a_fraction_of_welfare(seed in 0u64..10_000, n in 2usize..=3, m in 2usize..=6) {
        let inst: Instance<Rational> = gen_random(n, m, ValuationClass::Additive, seed).unwrap();
        let sw_opt = social_welfare(&inst, &brute_sw_opt(&inst).unwrap(), None);
        let nsw_opt = fairpay::model::nash_product(&inst, &brute_nsw_opt(&inst).unwrap(), None).unwrap();
        let nn = q(n as i64, 1);
        let pow = (0..n).fold(q(1, 1), |acc, _| acc * nn.clone());
        let results = [
            subadditive_baseline(&inst, None).unwrap(),
            nsw_pipeline_additive(&inst, &NswOptions::default()).unwrap(),
            algorithm1_additive(&inst, &q(1, 2)).unwrap(),
        ];
        for r in results {
            prop_assert_eq!(r.transfers.values().iter().cloned().sum::<Rational>(), q(0, 1));
            prop_assert!(is_envy_free(&inst, &r.allocation, r.transfers.values()).0);
            prop_assert!(r.report.sw.clone() * nn.clone() >= sw_opt.clone());
            prop_assert!(r.report.nash_product.clone().unwrap() * pow.clone() >= nsw_opt.clone());
        }
    }
}

/// Every simple path in the envy graph of an iterated-matching allocation
/// weighs at most one (additive, normalized).
#[test]
fn iterated_matching_paths_weigh_at_most_one() {
    fn walk(w: &[Vec<Rational>], at: usize, seen: &mut Vec<bool>, acc: Rational, worst: &mut Rational) {
        if acc > *worst {
            *worst = acc.clone();
        }
        for next in 0..w.len() {
            if !seen[next] {
                seen[next] = true;
                walk(w, next, seen, acc.clone() + w[at][next].clone(), worst);
                seen[next] = false;
            }
        }
    }
    for seed in 0..200u64 {
        let n = 2 + (seed as usize) % 3;
        let m = n + (seed as usize / 3) % 6;
        let inst: Instance<Rational> = gen_random(n, m, ValuationClass::Additive, seed).unwrap();
        let a = iterated_matching(&inst, ItemSet::full(m), &Allocation::empty(n, m));
        let g = build_envy_graph(&inst, &a);
        let mut worst = q(0, 1);
        for start in 0..n {
            let mut seen = vec![false; n];
            seen[start] = true;
            walk(g.weights(), start, &mut seen, q(0, 1), &mut worst);
        }
        assert!(worst <= q(1, 1), "seed {seed}: path weight {worst}");
        let (r, _) = reassign_bundles(&inst, &a);
        let s = min_subsidies(&inst, &r).unwrap();
        let cap = q(2 * (n as i64 - 1), 1);
        assert!(s.values().iter().all(|x| *x <= cap), "seed {seed}");
    }
}

#[test]
fn oracles_ignore_worker_count() {
    let inst: Instance<Rational> = gen_random(4, 7, ValuationClass::Monotone, 17).unwrap();
    let run = |k: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
        pool.install(|| (brute_sw_opt(&inst).unwrap(), brute_nsw_opt(&inst).unwrap()))
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
