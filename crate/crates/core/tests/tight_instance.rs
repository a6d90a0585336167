use rgreedi_core::instances::gen_tight_instance;
use rgreedi_core::objectives::Objective;
use rgreedi_core::verify::{check_appendix_a, estimate_expected_value};
use rgreedi_core::{det_greedi, greedy, rand_greedi, Constraint, ElementSet, Greedy, ValueOracle};

#[test]
fn optimum_covers_everything() {
    for l in 2..=6 {
        let inst = gen_tight_instance(l).unwrap();
        let Objective::Coverage(cov) = &inst.objective else {
            panic!()
        };
        let universe = l * l + l * l * l;
        assert_eq!(cov.universe_size(), universe);
        let opt = inst.known_opt_set.as_ref().unwrap();
        assert_eq!(opt.len(), l + l * l);
        assert!(inst.constraint.is_feasible(opt));
        // no set can cover more than the universe, so this is OPT
        assert_eq!(inst.objective.eval(opt), universe as f64);
        assert_eq!(inst.known_opt, Some(universe as f64));
    }
}

#[test]
fn fooling_sets_absorb_each_machine() {
    for l in 2..=5 {
        let inst = gen_tight_instance(l).unwrap();
        let k = l + l * l;
        let part = inst.adversarial_partition.as_ref().unwrap();
        let opt = inst.known_opt_set.as_ref().unwrap();
        let shards = part.shards();
        assert_eq!(shards.len(), l * l + 1);
        // machine 0 holds O_1..O_l
        assert!(shards[0].iter().take(l).all(|e| opt.contains(e)));

        for (t, shard) in shards.iter().enumerate().skip(1) {
            let trace = greedy(shard, &inst.objective, &inst.constraint);
            let order = trace.pick_order();
            assert_eq!(order.len(), k);
            // l fooling sets at gain l + 1 each, then zero-gain padding
            for (i, &(e, gain)) in trace.picks.iter().enumerate() {
                assert!(!opt.contains(e), "machine {t} picked optimal set {e}");
                let expected = if i < l { (l + 1) as f64 } else { 0.0 };
                assert_eq!(gain, expected);
            }
            let o_prime = shard.iter().find(|&e| opt.contains(e)).unwrap();
            let covered = ElementSet::from(order);
            assert_eq!(
                rgreedi_core::marginal_gain(&inst.objective, o_prime, &covered).unwrap(),
                0.0
            );
        }
    }
}

#[test]
fn deterministic_greedi_value_on_adversarial_partition() {
    // final greedy covers the l² items of O_1..O_l plus one extra item per
    // distinct fooling set it can afford: k = l + l² of them
    for l in 2..=5 {
        let inst = gen_tight_instance(l).unwrap();
        let part = inst.adversarial_partition.as_ref().unwrap();
        let r = det_greedi(&inst, part, &Greedy::default()).unwrap();
        assert_eq!(r.final_value, (2 * l * l + l) as f64, "l = {l}");
        let opt = inst.known_opt.unwrap();
        assert!(r.final_value / opt <= (2 * l + 1) as f64 / (l * l + l) as f64 + 1e-12);
    }
}

#[test]
fn sqrt_k_bound_on_adversarial_partition() {
    for l in 2..=5 {
        let inst = gen_tight_instance(l).unwrap();
        let check = check_appendix_a(&inst, inst.adversarial_partition.as_ref().unwrap()).unwrap();
        assert!(
            check.ratio >= check.bound,
            "l = {l}: {} < {}",
            check.ratio,
            check.bound
        );
    }
}

#[test]
fn random_partition_beats_adversarial_one() {
    for l in 3..=4 {
        let inst = gen_tight_instance(l).unwrap();
        let opt = inst.known_opt.unwrap();
        let part = inst.adversarial_partition.as_ref().unwrap();
        let det = det_greedi(&inst, part, &Greedy::default())
            .unwrap()
            .final_value
            / opt;
        let m = part.machines();
        let est = estimate_expected_value(
            |seed| {
                rand_greedi(&inst, m, &Greedy::default(), seed)
                    .unwrap()
                    .final_value
                    / opt
            },
            60,
            l as u64,
        )
        .unwrap();
        assert!(est.mean > det, "l = {l}: {} vs {det}", est.mean);
    }
}
