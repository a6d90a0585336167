//! Sequential building blocks: greedy, repeated greedy, double greedy, and the
//! non-monotone composite used on the last machine.
//!
//! All routines are deterministic given their inputs (and seed, where one is
//! taken). Among candidates with equal score the smallest id wins, and a
//! candidate with zero gain is still added; greedy stops only when no feasible
//! candidate remains or the best gain is strictly negative.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::constraints::Constraint;
use crate::oracle::ValueOracle;
use crate::rng::{CounterRng, STREAM_ALGORITHM};
use crate::set::{ElementId, ElementSet};

/// How candidates are scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyRule {
    /// Plain marginal gain.
    #[default]
    Standard,
    /// Gain divided by element cost, then compared against the best feasible
    /// singleton. Intended for knapsack constraints.
    Density,
}

/// How marginal gains are refreshed between picks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Re-evaluate every live candidate each round.
    #[default]
    Naive,
    /// Priority queue over stale upper bounds. Same picks as `Naive` on
    /// submodular objectives.
    Lazy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub rule: GreedyRule,
    pub evaluation: Evaluation,
}

impl GreedyOptions {
    pub fn lazy() -> Self {
        Self {
            evaluation: Evaluation::Lazy,
            ..Self::default()
        }
    }

    pub fn density() -> Self {
        Self {
            rule: GreedyRule::Density,
            ..Self::default()
        }
    }
}

/// Execution record of one greedy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    /// Picks in order with their marginal gain at pick time.
    pub picks: Vec<(ElementId, f64)>,
    pub final_set: ElementSet,
    /// `f(final_set)`, evaluated on the sorted set.
    pub value: f64,
    pub oracle_calls: u64,
}

impl GreedyTrace {
    pub fn pick_order(&self) -> Vec<ElementId> {
        self.picks.iter().map(|&(e, _)| e).collect()
    }
}

/// A feasible set returned by some algorithm together with its cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub set: ElementSet,
    pub value: f64,
    pub oracle_calls: u64,
}

impl From<GreedyTrace> for Solution {
    fn from(t: GreedyTrace) -> Self {
        Self {
            set: t.final_set,
            value: t.value,
            oracle_calls: t.oracle_calls,
        }
    }
}

/// Any algorithm that maps a pool to a feasible subset of it.
pub trait SubsetSolver: Sync {
    fn name(&self) -> String;

    fn solve(
        &self,
        pool: &ElementSet,
        f: &dyn ValueOracle,
        c: &dyn Constraint,
        seed: u64,
    ) -> Solution;
}

/// Greedy as a [`SubsetSolver`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy(pub GreedyOptions);

impl SubsetSolver for Greedy {
    fn name(&self) -> String {
        match self.0.rule {
            GreedyRule::Standard => "greedy".into(),
            GreedyRule::Density => "density_greedy".into(),
        }
    }

    fn solve(
        &self,
        pool: &ElementSet,
        f: &dyn ValueOracle,
        c: &dyn Constraint,
        _seed: u64,
    ) -> Solution {
        greedy_with(pool, f, c, self.0).into()
    }
}

/// [`nonmonotone_compose`] as a [`SubsetSolver`].
#[derive(Clone, Copy, Debug, Default)]
pub struct NonMonotoneCompose(pub GreedyOptions);

impl SubsetSolver for NonMonotoneCompose {
    fn name(&self) -> String {
        "nm_compose".into()
    }

    fn solve(
        &self,
        pool: &ElementSet,
        f: &dyn ValueOracle,
        c: &dyn Constraint,
        seed: u64,
    ) -> Solution {
        let out = nonmonotone_compose_with(pool, f, c, seed, self.0);
        Solution {
            set: out.set,
            value: out.value,
            oracle_calls: out.oracle_calls,
        }
    }
}

/// Standard greedy with naive evaluation.
pub fn greedy(pool: &ElementSet, f: &dyn ValueOracle, c: &dyn Constraint) -> GreedyTrace {
    greedy_with(pool, f, c, GreedyOptions::default())
}

pub fn greedy_with(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    opts: GreedyOptions,
) -> GreedyTrace {
    let trace = match opts.evaluation {
        Evaluation::Naive => greedy_naive(pool, f, c, opts.rule),
        Evaluation::Lazy => greedy_lazy(pool, f, c, opts.rule),
    };
    let trace = match opts.rule {
        GreedyRule::Standard => trace,
        GreedyRule::Density => with_best_singleton(trace, pool, f, c),
    };
    // report f on the canonical set so the value does not depend on pick order
    if trace.picks.is_sorted_by_key(|&(e, _)| e) {
        return trace;
    }
    GreedyTrace {
        value: f.eval(&trace.final_set),
        oracle_calls: trace.oracle_calls + 1,
        ..trace
    }
}

fn score(rule: GreedyRule, c: &dyn Constraint, e: ElementId, gain: f64) -> f64 {
    match rule {
        GreedyRule::Standard => gain,
        GreedyRule::Density => gain / c.element_cost(e),
    }
}

fn greedy_naive(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    rule: GreedyRule,
) -> GreedyTrace {
    let mut current: Vec<ElementId> = Vec::new();
    let mut value = f.eval(&current);
    let mut calls = 1;
    let mut picks = Vec::new();
    let mut live: Vec<ElementId> = pool.as_slice().to_vec();

    loop {
        let mut best: Option<(usize, f64, f64, f64)> = None; // (slot, score, gain, value)
        let mut feasible = vec![true; live.len()];
        for (slot, &e) in live.iter().enumerate() {
            current.push(e);
            if !c.is_feasible(&current) {
                feasible[slot] = false;
                current.pop();
                continue;
            }
            let v = f.eval(&current);
            calls += 1;
            current.pop();
            let gain = v - value;
            let s = score(rule, c, e, gain);
            if best.is_none_or(|(_, bs, _, _)| s > bs) {
                best = Some((slot, s, gain, v));
            }
        }
        let Some((slot, _, gain, v)) = best else {
            break;
        };
        if gain < 0.0 {
            break;
        }
        let e = live[slot];
        current.push(e);
        picks.push((e, gain));
        value = v;
        // infeasible extensions stay infeasible as the set grows
        let mut k = 0;
        live.retain(|_| {
            let keep = feasible[k] && k != slot;
            k += 1;
            keep
        });
    }

    GreedyTrace {
        final_set: ElementSet::from(current),
        picks,
        value,
        oracle_calls: calls,
    }
}

/// Relative slack for treating a stale heap entry as a possible winner.
const NEAR_TIE: f64 = 1e-9;

#[derive(Debug)]
struct Entry {
    score: f64,
    element: ElementId,
    round: usize,
    gain: f64,
    value: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // max-heap: higher score first, then smaller id
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.element.cmp(&self.element))
    }
}

fn greedy_lazy(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    rule: GreedyRule,
) -> GreedyTrace {
    let mut current: Vec<ElementId> = Vec::new();
    let mut value = f.eval(&current);
    let mut calls = 1;
    let mut picks = Vec::new();
    let mut heap = BinaryHeap::with_capacity(pool.len());

    for e in pool {
        current.push(e);
        if c.is_feasible(&current) {
            let v = f.eval(&current);
            calls += 1;
            let gain = v - value;
            heap.push(Entry {
                score: score(rule, c, e, gain),
                element: e,
                round: 0,
                gain,
                value: v,
            });
        }
        current.pop();
    }

    while let Some(top) = heap.pop() {
        let round = picks.len();
        if top.round == round {
            // Rounding can push a fresh gain a few ulps above its stale bound,
            // so stale entries within a hair of the top are refreshed before
            // committing. This keeps picks identical to the naive scan.
            let cutoff = top.score - NEAR_TIE * (1.0 + top.score.abs());
            if heap.iter().any(|x| x.round != round && x.score >= cutoff) {
                let mut near = Vec::new();
                heap.retain(|x| {
                    let stale = x.round != round && x.score >= cutoff;
                    if stale {
                        near.push(x.element);
                    }
                    !stale
                });
                heap.push(top);
                for e in near {
                    current.push(e);
                    if c.is_feasible(&current) {
                        let v = f.eval(&current);
                        calls += 1;
                        let gain = v - value;
                        heap.push(Entry {
                            score: score(rule, c, e, gain),
                            element: e,
                            round,
                            gain,
                            value: v,
                        });
                    }
                    current.pop();
                }
                continue;
            }
            if top.gain < 0.0 {
                break;
            }
            current.push(top.element);
            picks.push((top.element, top.gain));
            value = top.value;
            continue;
        }
        current.push(top.element);
        if c.is_feasible(&current) {
            let v = f.eval(&current);
            calls += 1;
            let gain = v - value;
            heap.push(Entry {
                score: score(rule, c, top.element, gain),
                element: top.element,
                round,
                gain,
                value: v,
            });
        }
        current.pop();
    }

    GreedyTrace {
        final_set: ElementSet::from(current),
        picks,
        value,
        oracle_calls: calls,
    }
}

fn with_best_singleton(
    trace: GreedyTrace,
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
) -> GreedyTrace {
    let base = f.eval(&[]);
    let mut calls = trace.oracle_calls + 1;
    let mut best: Option<(ElementId, f64)> = None;
    for e in pool {
        if !c.is_feasible(&[e]) {
            continue;
        }
        let v = f.eval(&[e]);
        calls += 1;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((e, v));
        }
    }
    match best {
        Some((e, v)) if v > trace.value && v - base >= 0.0 => GreedyTrace {
            picks: vec![(e, v - base)],
            final_set: ElementSet::from([e]),
            value: v,
            oracle_calls: calls,
        },
        _ => GreedyTrace {
            oracle_calls: calls,
            ..trace
        },
    }
}

/// Greedy on `pool`, then greedy again on what the first pass left behind.
pub fn repeated_greedy(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
) -> (GreedyTrace, GreedyTrace) {
    repeated_greedy_with(pool, f, c, GreedyOptions::default())
}

pub fn repeated_greedy_with(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    opts: GreedyOptions,
) -> (GreedyTrace, GreedyTrace) {
    let first = greedy_with(pool, f, c, opts);
    let rest = pool.difference(&first.final_set);
    let second = greedy_with(&rest, f, c, opts);
    (first, second)
}

/// Randomized double greedy for unconstrained maximization over `pool`.
///
/// Elements are visited in ascending id order. The coin for element `e` is
/// word `e` of the algorithm stream under `seed`.
pub fn double_greedy_unconstrained(pool: &ElementSet, f: &dyn ValueOracle, seed: u64) -> Solution {
    let mut rng = CounterRng::new(seed, STREAM_ALGORITHM);
    let mut x: Vec<ElementId> = Vec::with_capacity(pool.len());
    let mut y: ElementSet = pool.clone();
    let mut fx = f.eval(&x);
    let mut fy = f.eval(&y);
    let mut calls = 2;

    for e in pool {
        x.push(e);
        let fx_with = f.eval(&x);
        x.pop();
        let y_without = y.without(e);
        let fy_without = f.eval(&y_without);
        calls += 2;

        let a = (fx_with - fx).max(0.0);
        let b = (fy_without - fy).max(0.0);
        let include = if a + b == 0.0 {
            true
        } else {
            rng.unit(e as u64) < a / (a + b)
        };
        if include {
            x.push(e);
            fx = fx_with;
        } else {
            y = y_without;
            fy = fy_without;
        }
    }

    Solution {
        set: ElementSet::from(x),
        value: fx,
        oracle_calls: calls,
    }
}

/// Which of the three composite candidates was returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeChoice {
    FirstGreedy,
    SecondGreedy,
    DoubleGreedy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposeOutcome {
    pub first: GreedyTrace,
    pub second: GreedyTrace,
    pub unconstrained: Solution,
    pub choice: ComposeChoice,
    pub set: ElementSet,
    pub value: f64,
    pub oracle_calls: u64,
}

/// Best of `T1 = greedy(pool)`, `T2 = greedy(pool \ T1)` and a double-greedy
/// subset `T3 ⊆ T1`. Ties keep the earlier candidate.
pub fn nonmonotone_compose(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    seed: u64,
) -> ComposeOutcome {
    nonmonotone_compose_with(pool, f, c, seed, GreedyOptions::default())
}

pub fn nonmonotone_compose_with(
    pool: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    seed: u64,
    opts: GreedyOptions,
) -> ComposeOutcome {
    let (first, second) = repeated_greedy_with(pool, f, c, opts);
    let unconstrained = double_greedy_unconstrained(&first.final_set, f, seed);

    let mut choice = ComposeChoice::FirstGreedy;
    let mut value = first.value;
    if second.value > value {
        choice = ComposeChoice::SecondGreedy;
        value = second.value;
    }
    if unconstrained.value > value {
        choice = ComposeChoice::DoubleGreedy;
        value = unconstrained.value;
    }
    let set = match choice {
        ComposeChoice::FirstGreedy => first.final_set.clone(),
        ComposeChoice::SecondGreedy => second.final_set.clone(),
        ComposeChoice::DoubleGreedy => unconstrained.set.clone(),
    };
    let oracle_calls = first.oracle_calls + second.oracle_calls + unconstrained.oracle_calls;
    ComposeOutcome {
        first,
        second,
        unconstrained,
        choice,
        set,
        value,
        oracle_calls,
    }
}
