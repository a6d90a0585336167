use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgreedi_core::instances::{gen_diversity, gen_exemplar, gen_random_coverage};
use rgreedi_core::oracle::check_lovasz_scaling;
use rgreedi_core::verify::EstimateReport;
use rgreedi_core::{lovasz_extension, ElementSet, Instance, ValueOracle, WeightVector};

fn instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for s in 0..7 {
        out.push(gen_random_coverage(10 + s as usize % 3, 25, 0.25, 3, s).unwrap());
        out.push(gen_exemplar(9 + s as usize % 4, 12, 3, 100 + s).unwrap());
        if s < 6 {
            out.push(gen_diversity(12, 2.0, 3, 200 + s).unwrap());
        }
    }
    assert_eq!(out.len(), 20);
    out
}

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> WeightVector {
    // mix in exact 0/1 coordinates and repeated values to hit ties
    let x = (0..n)
        .map(|_| match rng.random_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            2 => 0.5,
            _ => rng.random::<f64>(),
        })
        .collect();
    WeightVector::new(x).unwrap()
}

#[test]
fn indicator_vectors_recover_f() {
    for inst in instances() {
        let n = inst.n();
        assert!(n <= 12);
        for mask in 0u32..(1 << n) {
            let s: ElementSet = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
            let x = WeightVector::indicator(&s, n);
            let lv = lovasz_extension(&inst.objective, &x).unwrap();
            assert!(
                (lv - inst.objective.eval(&s)).abs() <= 1e-12,
                "{} {s}",
                inst.name
            );
        }
    }
}

#[test]
fn convexity_at_midpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for inst in instances() {
        let n = inst.n();
        for _ in 0..1000 {
            let x = random_point(n, &mut rng);
            let y = random_point(n, &mut rng);
            let mid: Vec<f64> = x
                .as_slice()
                .iter()
                .zip(y.as_slice())
                .map(|(a, b)| (a + b) / 2.0)
                .collect();
            let mid = WeightVector::new(mid).unwrap();
            let lhs = lovasz_extension(&inst.objective, &mid).unwrap();
            let rhs = (lovasz_extension(&inst.objective, &x).unwrap()
                + lovasz_extension(&inst.objective, &y).unwrap())
                / 2.0;
            assert!(lhs <= rhs + 1e-9, "{}: {lhs} > {rhs}", inst.name);
        }
    }
}

#[test]
fn scaling_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let insts = instances();
    for i in 0..10_000 {
        let inst = &insts[i % insts.len()];
        let x = random_point(inst.n(), &mut rng);
        let c = match i % 50 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        assert!(check_lovasz_scaling(&inst.objective, &x, c).unwrap());
    }
}

#[test]
fn matches_threshold_expectation_by_quadrature() {
    // independent oracle: integrate f({i : x_i ≥ θ}) over breakpoints directly
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for inst in instances().into_iter().take(6) {
        let n = inst.n();
        for _ in 0..50 {
            let x = random_point(n, &mut rng);
            let mut cuts: Vec<f64> = x.as_slice().iter().copied().chain([0.0, 1.0]).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut expected = 0.0;
            for w in cuts.windows(2) {
                let theta = (w[0] + w[1]) / 2.0;
                let level: Vec<usize> = (0..n).filter(|&i| x.as_slice()[i] >= theta).collect();
                expected += (w[1] - w[0]) * inst.objective.eval(&level);
            }
            let got = lovasz_extension(&inst.objective, &x).unwrap();
            assert!((got - expected).abs() < 1e-9);
        }
    }
}

#[test]
fn random_set_mean_dominates_scaled_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for inst in instances().into_iter().step_by(4) {
        let n = inst.n();
        let p = random_point(n, &mut rng);
        let c = 0.6;
        let q: Vec<f64> = p.as_slice().iter().map(|v| c * v).collect();
        let samples: Vec<f64> = (0..10_000)
            .map(|_| {
                let s: Vec<usize> = (0..n).filter(|&i| rng.random_bool(q[i])).collect();
                inst.objective.eval(&s)
            })
            .collect();
        let est = EstimateReport::from_samples(&samples, 14).unwrap();
        let bound = c * lovasz_extension(&inst.objective, &p).unwrap();
        assert!(
            est.mean >= bound - 3.0 * est.std_error,
            "{}: {} < {bound}",
            inst.name,
            est.mean
        );
    }
}
