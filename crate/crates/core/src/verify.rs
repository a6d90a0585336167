//! Ground truth and statistics: exhaustive optimum, Monte Carlo estimation of
//! expected values, and checkers for the approximation bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{CardinalityConstraint, Constraint};
use crate::distributed::{det_greedi, Partition};
use crate::error::{Error, Result};
use crate::greedy::{greedy, greedy_with, Greedy, GreedyOptions};
use crate::instances::Instance;
use crate::oracle::ValueOracle;
use crate::rng::{derive_seed, CounterRng, STREAM_PARTITION};
use crate::set::{ElementId, ElementSet};

/// Largest pool that exhaustive routines will enumerate.
pub const ENUMERATION_CAP: usize = 24;

/// Slack used when comparing a value against `α · other` in the (GP) check.
pub const GP_TOL: f64 = 1e-9;

/// `1 − 1/e`.
pub fn one_minus_inv_e() -> f64 {
    1.0 - (-1.0f64).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub opt_set: ElementSet,
    pub opt_value: f64,
    /// Feasible sets examined.
    pub enumerated: u64,
}

impl OptResult {
    fn consider(&mut self, set: &[ElementId], value: f64) {
        self.enumerated += 1;
        let better =
            value > self.opt_value || (value == self.opt_value && set < self.opt_set.as_slice());
        if better {
            self.opt_value = value;
            self.opt_set = ElementSet::from_sorted_unchecked(set.to_vec());
        }
    }
}

fn check_cap(pool: &ElementSet) -> Result<()> {
    if pool.len() > ENUMERATION_CAP {
        return Err(Error::PoolTooLarge {
            size: pool.len(),
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Visits every feasible subset of `pool` exactly once, in ascending-element
/// construction order, skipping all supersets of infeasible sets.
fn for_each_feasible(pool: &[ElementId], c: &dyn Constraint, visit: &mut dyn FnMut(&[ElementId])) {
    fn rec(
        pool: &[ElementId],
        from: usize,
        current: &mut Vec<ElementId>,
        c: &dyn Constraint,
        visit: &mut dyn FnMut(&[ElementId]),
    ) {
        visit(current);
        for j in from..pool.len() {
            current.push(pool[j]);
            if c.is_feasible(current) {
                rec(pool, j + 1, current, c, visit);
            }
            current.pop();
        }
    }
    if c.is_feasible(&[]) {
        rec(pool, 0, &mut Vec::new(), c, visit);
    }
}

/// Exhaustive maximum of `f` over feasible subsets of `pool` with hereditary
/// pruning. Ties go to the lexicographically smallest set.
pub fn brute_force_opt(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
) -> Result<OptResult> {
    check_cap(pool)?;
    let mut best = OptResult {
        opt_set: ElementSet::new(),
        opt_value: f64::NEG_INFINITY,
        enumerated: 0,
    };
    for_each_feasible(pool, c, &mut |set| best.consider(set, f.eval(set)));
    Ok(best)
}

/// Same answer as [`brute_force_opt`] by scanning all `2^|pool|` subsets
/// without pruning. Kept as an independent cross-check.
pub fn brute_force_opt_unpruned(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
) -> Result<OptResult> {
    check_cap(pool)?;
    let mut best = OptResult {
        opt_set: ElementSet::new(),
        opt_value: f64::NEG_INFINITY,
        enumerated: 0,
    };
    let n = pool.len();
    let mut set = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) {
        set.clear();
        set.extend((0..n).filter(|&i| mask >> i & 1 == 1).map(|i| pool[i]));
        if c.is_feasible(&set) {
            best.consider(&set, f.eval(&set));
        }
    }
    Ok(best)
}

/// Maximum of `f` over all subsets of `pool`.
pub fn brute_force_unconstrained(pool: &ElementSet, f: &dyn ValueOracle) -> Result<OptResult> {
    let everything = CardinalityConstraint::new(pool.len().max(1))?;
    brute_force_opt(pool, f, &everything)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

impl EstimateReport {
    pub fn from_samples(samples: &[f64], seed: u64) -> Result<Self> {
        let trials = samples.len();
        if trials < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 trials, got {trials}"
            )));
        }
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        Ok(Self {
            mean,
            std_error: (var / trials as f64).sqrt(),
            trials,
            seed,
        })
    }
}

/// Runs `run(seed_i)` for `trials` derived seeds and summarizes the values.
/// Trials may run concurrently; aggregation is in seed order.
pub fn estimate_expected_value<F>(run: F, trials: usize, master_seed: u64) -> Result<EstimateReport>
where
    F: Fn(u64) -> f64 + Sync,
{
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 trials, got {trials}"
        )));
    }
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| run(derive_seed(master_seed, i)))
        .collect();
    EstimateReport::from_samples(&samples, master_seed)
}

/// `mean ≥ ratio · OPT − 3·SE`.
pub fn check_theorem_bound(report: &EstimateReport, opt: &OptResult, ratio: f64) -> Result<bool> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ratio {ratio} not in (0,1]"
        )));
    }
    Ok(report.mean >= ratio * opt.opt_value - 3.0 * report.std_error)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpCheck {
    pub passed: bool,
    /// Minimum of `f(G)/f(G ∪ S)` over feasible `S` (1 when `f(G ∪ S) = 0`).
    pub worst_ratio: f64,
    pub worst_set: ElementSet,
    pub greedy_set: ElementSet,
}

/// Evaluates `f(G) ≥ α·f(G ∪ S)` for `G = greedy(pool)` and every feasible
/// `S ⊆ pool`.
pub fn check_gp(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    pool: &ElementSet,
    alpha: f64,
) -> Result<GpCheck> {
    check_gp_with(f, c, pool, alpha, GreedyOptions::default())
}

pub fn check_gp_with(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    pool: &ElementSet,
    alpha: f64,
    opts: GreedyOptions,
) -> Result<GpCheck> {
    check_cap(pool)?;
    let g = greedy_with(pool, f, c, opts);
    let fg = g.value;
    let mut out = GpCheck {
        passed: true,
        worst_ratio: f64::INFINITY,
        worst_set: ElementSet::new(),
        greedy_set: g.final_set.clone(),
    };
    for_each_feasible(pool, c, &mut |set| {
        let joint = g
            .final_set
            .union(&ElementSet::from_sorted_unchecked(set.to_vec()));
        let fj = f.eval(&joint);
        if fg < alpha * fj - GP_TOL {
            out.passed = false;
        }
        let ratio = if fj > 0.0 { fg / fj } else { 1.0 };
        if ratio < out.worst_ratio {
            out.worst_ratio = ratio;
            out.worst_set = ElementSet::from_sorted_unchecked(set.to_vec());
        }
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtKCheck {
    /// Deterministic GreeDi value over OPT.
    pub ratio: f64,
    /// `(1 − 1/e) / (2√k)`.
    pub bound: f64,
    pub value: f64,
    pub opt: f64,
}

/// Deterministic GreeDi ratio on `partition` against the `√k` lower bound.
///
/// OPT is the instance's `known_opt` when present, otherwise brute force.
pub fn check_appendix_a(inst: &Instance, partition: &Partition) -> Result<SqrtKCheck> {
    let k = inst.constraint.cardinality_k().ok_or_else(|| {
        Error::InvalidParameter("the sqrt(k) bound applies to cardinality constraints only".into())
    })?;
    let opt = match inst.known_opt {
        Some(v) => v,
        None => brute_force_opt(&inst.ground(), &inst.objective, &inst.constraint)?.opt_value,
    };
    let report = det_greedi(inst, partition, &Greedy::default())?;
    let ratio = if opt > 0.0 {
        report.final_value / opt
    } else {
        1.0
    };
    Ok(SqrtKCheck {
        ratio,
        bound: one_minus_inv_e() / (2.0 * (k as f64).sqrt()),
        value: report.final_value,
        opt,
    })
}

/// Which inclusion event defines `p_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InclusionEvent {
    /// `e ∈ greedy(A ∪ {e})`.
    FirstPass,
    /// `e` is in the first or the repeated greedy pass on `A ∪ {e}`.
    EitherPass,
}

/// Monte Carlo estimate of `p_e` for `e ∈ opt_set` (zero elsewhere), with
/// `A ~ V(1/m)` drawn `draws` times. Returned vector has length `n`.
pub fn estimate_inclusion_probabilities(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    opt_set: &ElementSet,
    m: usize,
    draws: usize,
    seed: u64,
    event: InclusionEvent,
) -> Result<Vec<f64>> {
    if m == 0 || draws == 0 {
        return Err(Error::InvalidParameter("need m >= 1 and draws >= 1".into()));
    }
    let n = f.ground_size();
    opt_set.check_bounds(n)?;
    let hits: Vec<Vec<bool>> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut rng = CounterRng::new(derive_seed(seed, d), STREAM_PARTITION);
            let sample: ElementSet = (0..n)
                .filter(|&e| rng.below(e as u64, m as u64) == 0)
                .collect();
            opt_set
                .iter()
                .map(|e| {
                    let pool = sample.with(e);
                    let first = greedy(&pool, f, c);
                    if first.final_set.contains(e) {
                        return true;
                    }
                    match event {
                        InclusionEvent::FirstPass => false,
                        InclusionEvent::EitherPass => {
                            greedy(&pool.difference(&first.final_set), f, c)
                                .final_set
                                .contains(e)
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut p = vec![0.0; n];
    for row in &hits {
        for (e, &hit) in opt_set.iter().zip(row) {
            if hit {
                p[e] += 1.0;
            }
        }
    }
    p.iter_mut().for_each(|v| *v /= draws as f64);
    Ok(p)
}
