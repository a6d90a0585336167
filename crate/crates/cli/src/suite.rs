//! Bound and property suites. Each check regenerates its instances from fixed
//! seeds and reports one pass/fail outcome.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rgreedi_core::constraints::{PSystem, PartitionMatroid};
use rgreedi_core::instances::{
    gen_diverse_relevant, gen_diversity, gen_exemplar, gen_random_coverage, gen_tight_instance,
};
use rgreedi_core::oracle::check_lovasz_scaling;
use rgreedi_core::verify::{
    brute_force_opt, brute_force_unconstrained, check_appendix_a, check_gp,
    estimate_expected_value, one_minus_inv_e, EstimateReport,
};
use rgreedi_core::{
    det_greedi, double_greedy_unconstrained, greedy, lovasz_extension, nm_rand_greedi,
    partition_fixed, partition_random, rand_greedi, ConstraintOracle, ElementSet, Greedy, Instance,
    Partition, PartitionStrategy, ValueOracle, WeightVector,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::experiment::run_experiment;
use crate::report::csv_string;

/// `Full` uses the sample sizes the bounds are specified with; `Quick` cuts
/// Monte Carlo work for smoke runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Full,
    Quick,
}

impl Scale {
    fn seeds(self, full: usize) -> usize {
        match self {
            Scale::Full => full,
            Scale::Quick => (full / 10).max(20),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {}: {} ({:.1}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )?;
        if let Some(limit) = self.limit {
            write!(f, ", limit {}s", limit.as_secs())?;
        }
        write!(f, ")")
    }
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

const TITLES: [&str; 10] = [
    "centralized greedy vs 1-1/e",
    "rand_greedi mean vs alpha/2",
    "nm_rand_greedi mean vs alpha/(4+2alpha)",
    "greedy property (GP)",
    "rejected elements leave greedy unchanged",
    "tight instance for fixed partitions",
    "det_greedi vs (1-1/e)/(2 sqrt k)",
    "Lovasz extension identities",
    "double greedy vs half of unconstrained max",
    "determinism and m=1 collapse",
];

const LIMITS: [Option<u64>; 10] = [
    Some(30),
    Some(300),
    Some(300),
    None,
    None,
    Some(120),
    None,
    None,
    None,
    None,
];

pub fn run(id: u8, scale: Scale) -> Result<Outcome> {
    let start = Instant::now();
    let (ok, detail) = match id {
        1 => greedy_bound()?,
        2 => monotone_bound(scale)?,
        3 => nonmonotone_bound(scale)?,
        4 => gp_property()?,
        5 => rejected_elements()?,
        6 => tight_family(scale)?,
        7 => sqrt_k_bound(scale)?,
        8 => lovasz_identities()?,
        9 => double_greedy_half(scale)?,
        10 => determinism()?,
        _ => {
            return Err(crate::error::CliError::config(
                "criterion",
                format!("no criterion {id}"),
            ))
        }
    };
    let elapsed = start.elapsed();
    let idx = usize::from(id - 1);
    let limit = LIMITS[idx].map(Duration::from_secs);
    let in_time = limit.is_none_or(|l| scale == Scale::Quick || elapsed <= l);
    Ok(Outcome {
        id,
        title: TITLES[idx],
        passed: ok && in_time,
        detail: if in_time {
            detail
        } else {
            format!("{detail}; over time limit")
        },
        elapsed,
        limit,
    })
}

fn partition_oracle(
    n: usize,
    blocks: usize,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ConstraintOracle> {
    let part = (0..n).map(|_| rng.random_range(0..blocks)).collect();
    Ok(ConstraintOracle::PartitionMatroid(
        PartitionMatroid::uniform(part, cap)?,
    ))
}

fn p2_oracle(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<ConstraintOracle> {
    Ok(ConstraintOracle::PSystem(PSystem::new(vec![
        ConstraintOracle::cardinality(k)?,
        partition_oracle(n, 4, 1, rng)?,
    ])?))
}

fn opt_value(inst: &Instance) -> Result<f64> {
    Ok(match inst.known_opt {
        Some(v) => v,
        None => brute_force_opt(&inst.ground(), &inst.objective, &inst.constraint)?.opt_value,
    })
}

/// Random coverage instances with `n ≤ 14`, `k ≤ 4`.
pub fn greedy_bound_instances() -> Result<Vec<Instance>> {
    (0..200u64)
        .map(|s| {
            Ok(gen_random_coverage(
                8 + s as usize % 7,
                24,
                0.15,
                1 + s as usize % 4,
                1000 + s,
            )?)
        })
        .collect()
}

fn greedy_bound() -> Result<(bool, String)> {
    let alpha = one_minus_inv_e();
    let insts = greedy_bound_instances()?;
    let ratios: Vec<f64> = insts
        .par_iter()
        .map(|inst| {
            let g = greedy(&inst.ground(), &inst.objective, &inst.constraint);
            let opt = opt_value(inst)?;
            Ok(if opt > 0.0 { g.value / opt } else { 1.0 })
        })
        .collect::<Result<_>>()?;
    let violations = ratios.iter().filter(|&&r| r < alpha - 1e-9).count();
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        violations == 0,
        format!(
            "{} instances, {violations} violations, worst ratio {worst:.4} (bound {alpha:.4})",
            ratios.len()
        ),
    ))
}

/// The monotone suite: ten instances per constraint class with that class's
/// greedy constant.
pub fn monotone_instances() -> Result<Vec<(Instance, f64, &'static str)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut out = Vec::new();
    for s in 0..10u64 {
        let n = 12 + s as usize % 5;
        let base = gen_random_coverage(n, 30, 0.15, 2 + s as usize % 3, 2000 + s)?;
        out.push((base.clone(), one_minus_inv_e(), "cardinality"));
        let mut pm = base.clone();
        pm.constraint = partition_oracle(n, 4, 1, &mut rng)?;
        out.push((pm, 0.5, "partition_matroid"));
        let mut p2 = base;
        p2.constraint = p2_oracle(n, 3, &mut rng)?;
        out.push((p2, 1.0 / 3.0, "p_system"));
    }
    Ok(out)
}

struct BoundCheck {
    failures: usize,
    worst_margin: f64,
    cases: usize,
}

/// `mean ≥ ratio·OPT − 3·SE` for each `(instance, ratio, m)` case; the margin
/// is `mean/OPT − ratio`. Case `i` uses master seed `i`.
fn bound_cases<F>(cases: &[(Instance, f64, usize)], trials: usize, run: F) -> Result<BoundCheck>
where
    F: Fn(&Instance, usize, u64) -> f64 + Sync,
{
    let margins: Vec<(bool, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, (inst, ratio, m))| {
            let opt = opt_value(inst)?;
            let est = estimate_expected_value(|seed| run(inst, *m, seed), trials, i as u64)?;
            let ok = est.mean >= ratio * opt - 3.0 * est.std_error;
            let margin = if opt > 0.0 {
                est.mean / opt - ratio
            } else {
                0.0
            };
            Ok((ok, margin))
        })
        .collect::<Result<_>>()?;
    Ok(BoundCheck {
        failures: margins.iter().filter(|m| !m.0).count(),
        worst_margin: margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min),
        cases: margins.len(),
    })
}

fn monotone_cases() -> Result<Vec<(Instance, f64, usize)>> {
    let mut cases = Vec::new();
    for (inst, alpha, _) in monotone_instances()? {
        for m in [2, 4] {
            cases.push((inst.clone(), alpha / 2.0, m));
        }
    }
    Ok(cases)
}

fn monotone_bound(scale: Scale) -> Result<(bool, String)> {
    let trials = scale.seeds(500);
    let check = bound_cases(&monotone_cases()?, trials, |inst, m, seed| {
        rand_greedi(inst, m, &Greedy::default(), seed).map_or(f64::NAN, |r| r.final_value)
    })?;
    Ok((
        check.failures == 0,
        format!(
            "{} instance/m pairs x {trials} seeds, {} below bound, worst mean/OPT minus bound {:+.4}",
            check.cases, check.failures, check.worst_margin
        ),
    ))
}

pub fn diversity_instances() -> Result<Vec<Instance>> {
    (0..20u64)
        .map(|s| {
            Ok(gen_diverse_relevant(
                10 + s as usize % 3,
                1 + s as usize % 3,
                3000 + s,
            )?)
        })
        .collect()
}

fn nonmonotone_bound(scale: Scale) -> Result<(bool, String)> {
    let alpha = one_minus_inv_e();
    let ratio = alpha / (4.0 + 2.0 * alpha);
    let trials = scale.seeds(500);
    let cases: Vec<(Instance, f64, usize)> = diversity_instances()?
        .into_iter()
        .map(|i| (i, ratio, 2))
        .collect();
    let check = bound_cases(&cases, trials, |inst, m, seed| {
        nm_rand_greedi(inst, m, seed).map_or(f64::NAN, |r| r.final_value)
    })?;
    Ok((
        check.failures == 0,
        format!(
            "{} instances x {trials} seeds, m=2, bound {ratio:.4}, {} below, worst mean/OPT minus bound {:+.4}",
            check.cases, check.failures, check.worst_margin
        ),
    ))
}

/// Fifty coverage instances per constraint class for the (GP) check.
pub fn gp_instances() -> Result<Vec<(Instance, f64, &'static str)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = Vec::new();
    for s in 0..50u64 {
        let k = 1 + s as usize % 4;
        let base = gen_random_coverage(12, 20, 0.3, k, 4000 + s)?;
        out.push((base.clone(), one_minus_inv_e(), "cardinality"));
        let mut pm = base.clone();
        pm.constraint = partition_oracle(12, 3, 1 + s as usize % 2, &mut rng)?;
        out.push((pm, 0.5, "matroid"));
        let mut p2 = base;
        p2.constraint = p2_oracle(12, 3, &mut rng)?;
        out.push((p2, 1.0 / 3.0, "p_system"));
    }
    Ok(out)
}

fn gp_property() -> Result<(bool, String)> {
    let insts = gp_instances()?;
    let checks: Vec<(&'static str, bool, f64)> = insts
        .par_iter()
        .map(|(inst, alpha, class)| {
            let gp = check_gp(&inst.objective, &inst.constraint, &inst.ground(), *alpha)?;
            Ok((*class, gp.passed, gp.worst_ratio))
        })
        .collect::<Result<_>>()?;
    let mut parts = Vec::new();
    let mut all = true;
    for (class, alpha) in [
        ("cardinality", one_minus_inv_e()),
        ("matroid", 0.5),
        ("p_system", 1.0 / 3.0),
    ] {
        let of_class: Vec<_> = checks.iter().filter(|c| c.0 == class).collect();
        let fails = of_class.iter().filter(|c| !c.1).count();
        let worst = of_class.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        all &= fails == 0;
        parts.push(format!(
            "{class} {} worst {worst:.4} vs {alpha:.4} ({fails}/{} fail)",
            if fails == 0 { "ok" } else { "FAIL" },
            of_class.len()
        ));
    }
    Ok((all, parts.join("; ")))
}

fn rejected_elements() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    let mut failures = 0;
    let mut seed = 0u64;
    while cases < 500 {
        seed += 1;
        let mut inst = match seed % 3 {
            0 => gen_random_coverage(14, 30, 0.15, 3, 5000 + seed)?,
            1 => gen_exemplar(14, 8, 3, 5000 + seed)?,
            _ => gen_diverse_relevant(14, 3, 5000 + seed)?,
        };
        if seed.is_multiple_of(5) {
            inst.constraint = partition_oracle(14, 3, 1, &mut rng)?;
        }
        let (f, c) = (&inst.objective, &inst.constraint);
        let a: ElementSet = (0..14).filter(|_| rng.random_bool(0.5)).collect();
        let ga = greedy(&a, f, c).final_set;
        let b: ElementSet = (0..14)
            .filter(|&e| !a.contains(e))
            .filter(|&e| greedy(&a.with(e), f, c).final_set == ga)
            .collect();
        if b.is_empty() {
            continue;
        }
        cases += 1;
        if greedy(&a.union(&b), f, c).final_set != ga {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!("{cases} cases, {failures} mismatches"),
    ))
}

struct TightRow {
    l: usize,
    det_value: f64,
    opt: f64,
    rand_mean: f64,
}

fn tight_rows(scale: Scale) -> Result<Vec<TightRow>> {
    let trials = scale.seeds(200);
    (2..=5usize)
        .map(|l| {
            let inst = gen_tight_instance(l)?;
            let opt = inst.known_opt.expect("tight instance knows its optimum");
            let part = inst
                .adversarial_partition
                .as_ref()
                .expect("tight instance has a partition");
            let det = det_greedi(&inst, part, &Greedy::default())?;
            let m = part.machines();
            let est = estimate_expected_value(
                |seed| {
                    rand_greedi(&inst, m, &Greedy::default(), seed)
                        .map_or(f64::NAN, |r| r.final_value)
                },
                trials,
                l as u64,
            )?;
            Ok(TightRow {
                l,
                det_value: det.final_value,
                opt,
                rand_mean: est.mean / opt,
            })
        })
        .collect()
}

fn tight_family(scale: Scale) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for row in tight_rows(scale)? {
        let l = row.l as f64;
        let cap = 2.0 * l * l;
        let opt_exact = row.opt == l * l + l * l * l;
        let det_ratio = row.det_value / row.opt;
        let capped = row.det_value <= cap && det_ratio <= 2.0 / (1.0 + l);
        let beats = row.l < 3 || row.rand_mean > det_ratio;
        ok &= opt_exact && capped && beats;
        parts.push(format!(
            "l={} det {} (cap {cap}) OPT {} rand/OPT {:.3}{}",
            row.l,
            row.det_value,
            row.opt,
            row.rand_mean,
            if capped { "" } else { " over cap" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn sqrt_k_pairs(scale: Scale) -> Result<Vec<(Instance, Partition)>> {
    let mut pairs = Vec::new();
    let fixed = |inst: &Instance, pairs: &mut Vec<(Instance, Partition)>| -> Result<()> {
        for m in [2, 4] {
            for s in [PartitionStrategy::Block, PartitionStrategy::RoundRobin] {
                pairs.push((inst.clone(), partition_fixed(inst.n(), m, &s)?));
            }
        }
        Ok(())
    };
    for inst in greedy_bound_instances()? {
        fixed(&inst, &mut pairs)?;
    }
    for (inst, _, class) in gp_instances()? {
        if class == "cardinality" {
            fixed(&inst, &mut pairs)?;
        }
    }
    // the partitions rand_greedi drew in the monotone suite
    let trials = scale.seeds(500) as u64;
    for (i, (inst, _, class)) in monotone_instances()?.into_iter().enumerate() {
        if class != "cardinality" {
            continue;
        }
        for (j, m) in [2, 4].into_iter().enumerate() {
            let case = (2 * i + j) as u64;
            for t in 0..trials {
                let seed = rgreedi_core::rng::derive_seed(case, t);
                pairs.push((inst.clone(), partition_random(inst.n(), m, seed)?));
            }
        }
    }
    for l in 2..=5usize {
        let inst = gen_tight_instance(l)?;
        let part = inst
            .adversarial_partition
            .clone()
            .expect("tight instance has a partition");
        let m = part.machines();
        pairs.push((inst.clone(), part));
        for t in 0..scale.seeds(200) as u64 {
            let seed = rgreedi_core::rng::derive_seed(l as u64, t);
            pairs.push((inst.clone(), partition_random(inst.n(), m, seed)?));
        }
    }
    Ok(pairs)
}

fn sqrt_k_bound(scale: Scale) -> Result<(bool, String)> {
    let pairs = sqrt_k_pairs(scale)?;
    let mut opt_cache: Vec<(String, f64)> = Vec::new();
    for (inst, _) in &pairs {
        let d = inst.digest();
        if !opt_cache.iter().any(|(x, _)| *x == d) {
            let mut with_opt = inst.clone();
            with_opt.known_opt = Some(opt_value(inst)?);
            opt_cache.push((d, with_opt.known_opt.unwrap_or(0.0)));
        }
    }
    let checks: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(inst, part)| {
            let d = inst.digest();
            let mut inst = inst.clone();
            inst.known_opt = opt_cache.iter().find(|(x, _)| *x == d).map(|x| x.1);
            let c = check_appendix_a(&inst, part)?;
            Ok((c.ratio, c.bound))
        })
        .collect::<Result<_>>()?;
    let violations = checks.iter().filter(|(r, b)| r < b).count();
    let slack = checks
        .iter()
        .map(|(r, b)| r - b)
        .fold(f64::INFINITY, f64::min);
    Ok((
        violations == 0,
        format!(
            "{} instance/partition pairs, {violations} violations, min ratio-bound {slack:+.4}",
            checks.len()
        ),
    ))
}

fn lovasz_instances() -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for s in 0..7u64 {
        out.push(gen_random_coverage(
            10 + s as usize % 3,
            25,
            0.25,
            3,
            8000 + s,
        )?);
        out.push(gen_exemplar(9 + s as usize % 4, 12, 3, 8100 + s)?);
        if s < 6 {
            out.push(gen_diversity(12, 2.0, 3, 8200 + s)?);
        }
    }
    Ok(out)
}

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> Result<WeightVector> {
    let x = (0..n)
        .map(|_| match rng.random_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            2 => 0.5,
            _ => rng.random::<f64>(),
        })
        .collect();
    Ok(WeightVector::new(x)?)
}

fn lovasz_identities() -> Result<(bool, String)> {
    let insts = lovasz_instances()?;
    let mut indicator_fail = 0;
    let mut subsets = 0u64;
    for inst in &insts {
        let n = inst.n();
        for mask in 0u32..(1 << n) {
            let s: ElementSet = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
            let lv = lovasz_extension(&inst.objective, &WeightVector::indicator(&s, n))?;
            subsets += 1;
            if (lv - inst.objective.eval(&s)).abs() > 1e-12 {
                indicator_fail += 1;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut scaling_fail = 0;
    for i in 0..10_000 {
        let inst = &insts[i % insts.len()];
        let x = random_point(inst.n(), &mut rng)?;
        let c: f64 = rng.random();
        if !check_lovasz_scaling(&inst.objective, &x, c)? {
            scaling_fail += 1;
        }
    }

    let mut mc_fail = 0;
    for inst in insts.iter().step_by(4) {
        let n = inst.n();
        let p = random_point(n, &mut rng)?;
        let c = 0.6;
        let samples: Vec<f64> = (0..10_000)
            .map(|_| {
                let s: Vec<usize> = (0..n)
                    .filter(|&i| rng.random_bool(c * p.as_slice()[i]))
                    .collect();
                inst.objective.eval(&s)
            })
            .collect();
        let est = EstimateReport::from_samples(&samples, 8)?;
        if est.mean < c * lovasz_extension(&inst.objective, &p)? - 3.0 * est.std_error {
            mc_fail += 1;
        }
    }
    Ok((
        indicator_fail + scaling_fail + mc_fail == 0,
        format!(
            "{} instances: indicator {indicator_fail}/{subsets} off, scaling {scaling_fail}/10000 off, random-set bound {mc_fail} off",
            insts.len()
        ),
    ))
}

fn double_greedy_half(scale: Scale) -> Result<(bool, String)> {
    let runs = scale.seeds(2000);
    let results: Vec<(bool, f64)> = (0..20u64)
        .into_par_iter()
        .map(|s| {
            // λ = 2: a weighted cut function, non-negative and non-monotone
            let inst = gen_diversity(8 + s as usize % 5, 2.0, 1, 9000 + s)?;
            let ground = inst.ground();
            let opt = brute_force_unconstrained(&ground, &inst.objective)?.opt_value;
            let est = estimate_expected_value(
                |seed| double_greedy_unconstrained(&ground, &inst.objective, seed).value,
                runs,
                s,
            )?;
            Ok((est.mean >= 0.5 * opt - 3.0 * est.std_error, est.mean / opt))
        })
        .collect::<Result<_>>()?;
    let worst = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let fails = results.iter().filter(|r| !r.0).count();
    Ok((
        fails == 0,
        format!("20 instances x {runs} runs, {fails} below bound, worst mean/max {worst:.4}"),
    ))
}

fn determinism() -> Result<(bool, String)> {
    let mut collapse_fail = 0;
    for s in 0..50u64 {
        let inst = match s % 3 {
            0 => gen_random_coverage(25, 40, 0.1, 1 + s as usize % 5, 10_000 + s)?,
            1 => gen_exemplar(25, 8, 1 + s as usize % 5, 10_000 + s)?,
            _ => gen_diverse_relevant(14, 1 + s as usize % 3, 10_000 + s)?,
        };
        let g = greedy(&inst.ground(), &inst.objective, &inst.constraint);
        let r = rand_greedi(&inst, 1, &Greedy::default(), s)?;
        if r.final_set != g.final_set || r.final_value.to_bits() != g.value.to_bits() {
            collapse_fail += 1;
        }
    }
    let cfg = ExperimentConfig {
        experiment: Experiment::CoverageRatio,
        trials: 25,
        seed: 10,
        ..ExperimentConfig::default()
    };
    let a = csv_string(&run_experiment(&cfg)?)?;
    let b = csv_string(&run_experiment(&cfg)?)?;
    let same = a == b;
    Ok((
        collapse_fail == 0 && same,
        format!(
            "m=1 collapse {collapse_fail}/50 differ; CSV repeat {} ({} bytes)",
            if same { "byte-identical" } else { "DIFFERS" },
            a.len()
        ),
    ))
}
