use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgreedi_core::constraints::{KnapsackConstraint, PSystem, PartitionMatroid};
use rgreedi_core::greedy::{greedy_with, ComposeChoice, GreedyOptions};
use rgreedi_core::instances::{
    gen_diverse_relevant, gen_diversity, gen_exemplar, gen_random_coverage,
};
use rgreedi_core::objectives::{ModularInstance, Objective};
use rgreedi_core::verify::{
    brute_force_opt, brute_force_unconstrained, check_gp, estimate_expected_value, one_minus_inv_e,
};
use rgreedi_core::{
    double_greedy_unconstrained, greedy, nonmonotone_compose, repeated_greedy, Constraint,
    ConstraintOracle, ElementSet, Instance, ValueOracle,
};

fn partition_oracle(n: usize, blocks: usize, cap: usize, rng: &mut ChaCha8Rng) -> ConstraintOracle {
    let part = (0..n).map(|_| rng.random_range(0..blocks)).collect();
    ConstraintOracle::PartitionMatroid(PartitionMatroid::uniform(part, cap).unwrap())
}

fn p2_oracle(n: usize, k: usize, rng: &mut ChaCha8Rng) -> ConstraintOracle {
    ConstraintOracle::PSystem(
        PSystem::new(vec![
            partition_oracle(n, 4, 1, rng),
            ConstraintOracle::cardinality(k).unwrap(),
        ])
        .unwrap(),
    )
}

/// Mixed bag of instances and constraints for invariants that hold for any
/// submodular objective.
fn mixed(count: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    (0..count)
        .map(|s| {
            let mut inst = match s % 3 {
                0 => gen_random_coverage(12, 30, 0.2, 3, s).unwrap(),
                1 => gen_exemplar(12, 10, 3, s).unwrap(),
                _ => gen_diverse_relevant(12, 3, s).unwrap(),
            };
            let n = inst.n();
            inst.constraint = match s % 4 {
                0 => ConstraintOracle::cardinality(1 + s as usize % 4).unwrap(),
                1 => partition_oracle(n, 3, 2, &mut rng),
                2 => p2_oracle(n, 4, &mut rng),
                _ => {
                    let w = (0..n)
                        .map(|_| f64::from(rng.random_range(1u8..=6)))
                        .collect();
                    ConstraintOracle::Knapsack(KnapsackConstraint::new(w, 9.0).unwrap())
                }
            };
            inst
        })
        .collect()
}

#[test]
fn hand_traces() {
    let f = ModularInstance::new(vec![5.0, 3.0, 1.0]).unwrap();
    let t = greedy(
        &ElementSet::full(3),
        &f,
        &ConstraintOracle::cardinality(2).unwrap(),
    );
    assert_eq!(t.pick_order(), vec![0, 1]);
    assert_eq!(t.value, 8.0);

    // {a,b,c}, {a,b}, {c,d}: gains 3, then 1 for set 2 and 0 for set 1
    let cov = rgreedi_core::objectives::CoverageInstance::new(
        4,
        vec![vec![0, 1, 2], vec![0, 1], vec![2, 3]],
    )
    .unwrap();
    let t = greedy(
        &ElementSet::full(3),
        &cov,
        &ConstraintOracle::cardinality(2).unwrap(),
    );
    assert_eq!(t.picks, vec![(0, 3.0), (2, 1.0)]);
    assert_eq!(t.value, 4.0);
}

#[test]
fn cardinality_greedy_beats_one_minus_inv_e() {
    let alpha = one_minus_inv_e();
    for s in 0..200 {
        let n = 8 + s as usize % 7;
        let k = 1 + s as usize % 4;
        let inst = gen_random_coverage(n, 24, 0.15, k, 1000 + s).unwrap();
        let g = greedy(&inst.ground(), &inst.objective, &inst.constraint);
        let opt = brute_force_opt(&inst.ground(), &inst.objective, &inst.constraint).unwrap();
        assert!(g.value >= alpha * opt.opt_value - 1e-9, "{}", inst.name);
    }
}

#[test]
fn lazy_matches_naive() {
    for inst in mixed(120) {
        for base in [GreedyOptions::default(), GreedyOptions::density()] {
            let lazy = GreedyOptions {
                evaluation: GreedyOptions::lazy().evaluation,
                ..base
            };
            let a = greedy_with(&inst.ground(), &inst.objective, &inst.constraint, base);
            let b = greedy_with(&inst.ground(), &inst.objective, &inst.constraint, lazy);
            assert_eq!(a.pick_order(), b.pick_order(), "{}", inst.name);
            assert_eq!(a.final_set, b.final_set);
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }
}

#[test]
fn traces_are_feasible_and_repeatable() {
    for inst in mixed(80) {
        let a = greedy(&inst.ground(), &inst.objective, &inst.constraint);
        let b = greedy(&inst.ground(), &inst.objective, &inst.constraint);
        assert_eq!(a, b);
        assert!(inst.constraint.is_feasible(&a.final_set));
        let from_picks: ElementSet = a.pick_order().into_iter().collect();
        assert_eq!(from_picks, a.final_set);
        assert!((a.value - inst.objective.eval(&a.final_set)).abs() < 1e-9);
        // recorded gains are the marginals at pick time
        let mut prefix = ElementSet::new();
        for &(e, gain) in &a.picks {
            let g = rgreedi_core::marginal_gain(&inst.objective, e, &prefix).unwrap();
            assert!((g - gain).abs() < 1e-9);
            prefix = prefix.with(e);
        }
    }
}

#[test]
fn same_trace_on_any_thread_pool() {
    let insts = mixed(30);
    let run = || {
        insts
            .iter()
            .map(|i| greedy(&i.ground(), &i.objective, &i.constraint))
            .collect::<Vec<_>>()
    };
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(one, four);
}

#[test]
fn monotone_cardinality_gains_do_not_increase() {
    for s in 0..60 {
        let inst = if s % 2 == 0 {
            gen_random_coverage(40, 60, 0.1, 10, s).unwrap()
        } else {
            gen_exemplar(40, 16, 10, s).unwrap()
        };
        let t = greedy(&inst.ground(), &inst.objective, &inst.constraint);
        for w in t.picks.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9, "{}", inst.name);
        }
    }
}

#[test]
fn rejected_elements_do_not_change_greedy() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut cases = 0;
    let mut seed = 0;
    while cases < 500 {
        seed += 1;
        let mut inst = match seed % 3 {
            0 => gen_random_coverage(14, 30, 0.15, 3, seed).unwrap(),
            1 => gen_exemplar(14, 8, 3, seed).unwrap(),
            _ => gen_diverse_relevant(14, 3, seed).unwrap(),
        };
        if seed % 5 == 0 {
            inst.constraint = partition_oracle(14, 3, 1, &mut rng);
        }
        let (f, c) = (&inst.objective, &inst.constraint);
        let a: ElementSet = (0..14).filter(|_| rng.random_bool(0.5)).collect();
        let ga = greedy(&a, f, c);
        let b: ElementSet = (0..14)
            .filter(|&e| !a.contains(e))
            .filter(|&e| greedy(&a.with(e), f, c).final_set == ga.final_set)
            .collect();
        if b.is_empty() {
            continue;
        }
        cases += 1;
        assert_eq!(
            greedy(&a.union(&b), f, c).final_set,
            ga.final_set,
            "{}",
            inst.name
        );
    }
}

#[test]
fn gp_holds_for_matroid_and_p2() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for s in 0..50 {
        let mut inst = gen_random_coverage(12, 20, 0.3, 3, s).unwrap();
        inst.constraint = partition_oracle(12, 3, 1 + s as usize % 2, &mut rng);
        let gp = check_gp(&inst.objective, &inst.constraint, &inst.ground(), 0.5).unwrap();
        assert!(gp.passed, "matroid {s}: {}", gp.worst_ratio);

        inst.constraint = p2_oracle(12, 3, &mut rng);
        let gp = check_gp(&inst.objective, &inst.constraint, &inst.ground(), 1.0 / 3.0).unwrap();
        assert!(gp.passed, "p2 {s}: {}", gp.worst_ratio);
    }
}

#[test]
fn gp_under_cardinality_holds_at_one_half() {
    for s in 0..50 {
        let k = 1 + s as usize % 4;
        let inst = gen_random_coverage(12, 20, 0.3, k, s).unwrap();
        let gp = check_gp(&inst.objective, &inst.constraint, &inst.ground(), 0.5).unwrap();
        assert!(gp.passed, "{s}: {}", gp.worst_ratio);
    }
}

#[test]
fn gp_under_single_pick_can_fall_below_one_minus_inv_e() {
    // k = 1: greedy takes the biggest set; a disjoint set of nearly equal size
    // halves the ratio
    let cov = rgreedi_core::objectives::CoverageInstance::new(5, vec![vec![0, 1, 2], vec![3, 4]])
        .unwrap();
    let c = ConstraintOracle::cardinality(1).unwrap();
    let gp = check_gp(&cov, &c, &ElementSet::full(2), one_minus_inv_e()).unwrap();
    assert!(!gp.passed);
    assert!((gp.worst_ratio - 0.6).abs() < 1e-12);
    assert_eq!(gp.worst_set, ElementSet::from([1]));
}

#[test]
fn repeated_greedy_structure() {
    let f = ModularInstance::new(vec![5.0, 3.0, 1.0]).unwrap();
    let (a, b) = repeated_greedy(
        &ElementSet::full(3),
        &f,
        &ConstraintOracle::cardinality(1).unwrap(),
    );
    assert_eq!(a.final_set, ElementSet::from([0]));
    assert_eq!(b.final_set, ElementSet::from([1]));

    let (a, b) = repeated_greedy(
        &ElementSet::full(3),
        &f,
        &ConstraintOracle::cardinality(3).unwrap(),
    );
    assert_eq!(a.final_set, ElementSet::full(3));
    assert!(b.final_set.is_empty());

    for s in 0..20 {
        let inst = gen_diverse_relevant(6, 2, s).unwrap();
        let (a, b) = repeated_greedy(&inst.ground(), &inst.objective, &inst.constraint);
        assert!(a.final_set.is_disjoint(&b.final_set));
        assert!(inst.constraint.is_feasible(&a.final_set));
        assert!(inst.constraint.is_feasible(&b.final_set));
    }
}

#[test]
fn double_greedy_trivial_cases() {
    let f = ModularInstance::new(vec![2.0, 0.0, 1.5, 4.0]).unwrap();
    for seed in 0..10 {
        let s = double_greedy_unconstrained(&ElementSet::full(4), &f, seed);
        assert_eq!(s.set, ElementSet::full(4));
    }
    let zero = ModularInstance::new(vec![0.0; 5]).unwrap();
    let s = double_greedy_unconstrained(&ElementSet::full(5), &zero, 3);
    assert_eq!(s.value, 0.0);
}

#[test]
fn double_greedy_half_of_unconstrained_max() {
    // λ = 2 turns the diversity objective into a weighted cut function:
    // non-negative, non-monotone, f(V) = 0
    for s in 0..20 {
        let inst = gen_diversity(8 + s as usize % 5, 2.0, 1, 300 + s).unwrap();
        let ground = inst.ground();
        assert!(inst.objective.eval(&ground).abs() < 1e-9);
        let opt = brute_force_unconstrained(&ground, &inst.objective).unwrap();
        let est = estimate_expected_value(
            |seed| double_greedy_unconstrained(&ground, &inst.objective, seed).value,
            2000,
            s,
        )
        .unwrap();
        assert!(
            est.mean >= 0.5 * opt.opt_value - 3.0 * est.std_error,
            "{}: {} vs {}",
            inst.name,
            est.mean,
            opt.opt_value
        );
    }
}

#[test]
fn compose_never_prefers_double_greedy_on_monotone() {
    for s in 0..40 {
        let inst = if s % 2 == 0 {
            gen_random_coverage(12, 30, 0.2, 3, s).unwrap()
        } else {
            gen_exemplar(12, 8, 3, s).unwrap()
        };
        let out = nonmonotone_compose(&inst.ground(), &inst.objective, &inst.constraint, s);
        assert_ne!(out.choice, ComposeChoice::DoubleGreedy, "{}", inst.name);
        assert!(out.unconstrained.set.is_subset(&out.first.final_set));
        assert!(out.unconstrained.value <= out.first.value + 1e-9);
        assert_eq!(out.value, out.first.value.max(out.second.value));
    }
}

#[test]
fn compose_can_prefer_second_pass_on_monotone() {
    // greedy is only approximate, so the leftover pass can win outright
    let inst = gen_random_coverage(12, 30, 0.2, 3, 10).unwrap();
    let out = nonmonotone_compose(&inst.ground(), &inst.objective, &inst.constraint, 10);
    assert_eq!(out.choice, ComposeChoice::SecondGreedy);
    assert!(out.second.value > out.first.value);
}

#[test]
fn compose_meets_its_bound_in_expectation() {
    let alpha = one_minus_inv_e();
    let ratio = alpha / (2.0 * (1.0 + alpha));
    for s in 0..12 {
        let inst = gen_diverse_relevant(10 + s as usize % 3, 1 + s as usize % 3, s).unwrap();
        let ground = inst.ground();
        let opt = brute_force_opt(&ground, &inst.objective, &inst.constraint).unwrap();
        let est = estimate_expected_value(
            |seed| nonmonotone_compose(&ground, &inst.objective, &inst.constraint, seed).value,
            200,
            s,
        )
        .unwrap();
        assert!(est.mean >= ratio * opt.opt_value - 3.0 * est.std_error);
    }
}

#[test]
fn compose_on_empty_pool() {
    let inst = gen_diverse_relevant(6, 2, 0).unwrap();
    let out = nonmonotone_compose(&ElementSet::new(), &inst.objective, &inst.constraint, 0);
    assert!(out.set.is_empty());
    assert_eq!(out.value, inst.objective.eval(&[]));
}

#[test]
fn modular_objective_is_enumerated_exactly() {
    // greedy is optimal for modular objectives under a matroid
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        let w: Vec<f64> = (0..10)
            .map(|_| f64::from(rng.random_range(0u8..20)))
            .collect();
        let f = Objective::Modular(ModularInstance::new(w).unwrap());
        let c = partition_oracle(10, 3, 2, &mut rng);
        let g = greedy(&ElementSet::full(10), &f, &c);
        let opt = brute_force_opt(&ElementSet::full(10), &f, &c).unwrap();
        assert_eq!(g.value, opt.opt_value);
    }
}
