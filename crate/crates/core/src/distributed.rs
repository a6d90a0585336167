//! Two-round distributed greedy, simulated in-process with one logical worker
//! per machine.
//!
//! Round one runs greedy on every shard (concurrently, via rayon); the union
//! of the shard solutions is shipped to a single machine, which runs the
//! last-round algorithm on it. The best of the last-round solution and all
//! first-round solutions is returned, scored with the global objective.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::greedy::{
    greedy_with, repeated_greedy_with, Greedy, GreedyOptions, NonMonotoneCompose, SubsetSolver,
};
use crate::instances::Instance;
use crate::oracle::ValueOracle;
use crate::rng::{CounterRng, STREAM_PARTITION};
use crate::set::{ElementId, ElementSet};

/// Assignment of every ground-set element to one of `m` machines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    machine_of: Vec<usize>,
    m: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionStrategy {
    /// Element `e` goes to machine `⌊e·m/n⌋`.
    Block,
    /// Element `e` goes to machine `e mod m`.
    RoundRobin,
    Explicit(Vec<usize>),
}

impl Partition {
    pub fn new(machine_of: Vec<usize>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPartition("need at least one machine".into()));
        }
        if let Some((e, &i)) = machine_of.iter().enumerate().find(|(_, &i)| i >= m) {
            return Err(Error::InvalidPartition(format!(
                "element {e} assigned to machine {i}, but m = {m}"
            )));
        }
        Ok(Self { machine_of, m })
    }

    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn ground_size(&self) -> usize {
        self.machine_of.len()
    }

    pub fn machine_of(&self, e: ElementId) -> usize {
        self.machine_of[e]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.machine_of
    }

    /// The elements held by each machine, in machine order.
    pub fn shards(&self) -> Vec<ElementSet> {
        let mut shards = vec![Vec::new(); self.m];
        for (e, &i) in self.machine_of.iter().enumerate() {
            shards[i].push(e);
        }
        shards
            .into_iter()
            .map(ElementSet::from_sorted_unchecked)
            .collect()
    }

    pub fn loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.m];
        for &i in &self.machine_of {
            loads[i] += 1;
        }
        loads
    }
}

/// Each element independently to a uniform machine; element `e` uses word `e`
/// of the partition stream, so the draw is reproducible for fixed `(n, m, seed)`.
pub fn partition_random(n: usize, m: usize, seed: u64) -> Result<Partition> {
    if m == 0 {
        return Err(Error::InvalidPartition("need at least one machine".into()));
    }
    let mut rng = CounterRng::new(seed, STREAM_PARTITION);
    let machine_of = (0..n)
        .map(|e| rng.below(e as u64, m as u64) as usize)
        .collect();
    Partition::new(machine_of, m)
}

pub fn partition_fixed(n: usize, m: usize, strategy: &PartitionStrategy) -> Result<Partition> {
    if m == 0 {
        return Err(Error::InvalidPartition("need at least one machine".into()));
    }
    let machine_of = match strategy {
        PartitionStrategy::Block => (0..n).map(|e| e * m / n.max(1)).collect(),
        PartitionStrategy::RoundRobin => (0..n).map(|e| e % m).collect(),
        PartitionStrategy::Explicit(assignment) => {
            if assignment.len() != n {
                return Err(Error::InvalidPartition(format!(
                    "explicit assignment covers {} elements, expected {n}",
                    assignment.len()
                )));
            }
            assignment.clone()
        }
    };
    Partition::new(machine_of, m)
}

/// Where the returned solution came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BestSource {
    /// Pass 0 is the first greedy on the shard, pass 1 the repeated one.
    Round1 {
        machine: usize,
        pass: usize,
    },
    Round2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub final_set: ElementSet,
    pub final_value: f64,
    /// Per machine: one solution for the monotone algorithm, two for the
    /// non-monotone one.
    pub round1_solutions: Vec<Vec<ElementSet>>,
    pub round1_values: Vec<Vec<f64>>,
    pub round2_solution: ElementSet,
    pub round2_value: f64,
    pub best_source: BestSource,
    /// Elements placed on the last machine, `|∪ S_i|`.
    pub communicated: usize,
    pub oracle_calls: u64,
    pub seed: Option<u64>,
    pub wall_time: Duration,
}

impl RunReport {
    /// Equality of everything except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.final_set == other.final_set
            && self.final_value.to_bits() == other.final_value.to_bits()
            && self.round1_solutions == other.round1_solutions
            && self.round2_solution == other.round2_solution
            && self.best_source == other.best_source
            && self.communicated == other.communicated
            && self.oracle_calls == other.oracle_calls
            && self.seed == other.seed
    }

    pub fn best_round1_value(&self) -> f64 {
        self.round1_values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FirstRound {
    Single,
    Repeated,
}

struct MachineOutput {
    solutions: Vec<ElementSet>,
    values: Vec<f64>,
    calls: u64,
}

fn run_machine(
    shard: &ElementSet,
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    opts: GreedyOptions,
    mode: FirstRound,
) -> MachineOutput {
    match mode {
        FirstRound::Single => {
            let t = greedy_with(shard, f, c, opts);
            MachineOutput {
                values: vec![t.value],
                calls: t.oracle_calls,
                solutions: vec![t.final_set],
            }
        }
        FirstRound::Repeated => {
            let (a, b) = repeated_greedy_with(shard, f, c, opts);
            MachineOutput {
                values: vec![a.value, b.value],
                calls: a.oracle_calls + b.oracle_calls,
                solutions: vec![a.final_set, b.final_set],
            }
        }
    }
}

fn two_rounds(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    partition: &Partition,
    opts: GreedyOptions,
    mode: FirstRound,
    last_alg: &dyn SubsetSolver,
    seed: Option<u64>,
) -> Result<RunReport> {
    let n = f.ground_size();
    if partition.ground_size() != n {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} elements, ground set has {n}",
            partition.ground_size()
        )));
    }
    let start = Instant::now();
    let shards = partition.shards();
    let outputs: Vec<MachineOutput> = shards
        .par_iter()
        .map(|shard| run_machine(shard, f, c, opts, mode))
        .collect();

    let merged = outputs
        .iter()
        .flat_map(|o| o.solutions.iter())
        .fold(ElementSet::new(), |acc, s| acc.union(s));
    let last = last_alg.solve(&merged, f, c, seed.unwrap_or(0));
    // score with the global oracle regardless of what the solver reports
    let round2_value = f.eval(&last.set);

    let mut best_source = BestSource::Round2;
    let mut best_value = round2_value;
    for (machine, out) in outputs.iter().enumerate() {
        for (pass, &v) in out.values.iter().enumerate() {
            if v > best_value {
                best_value = v;
                best_source = BestSource::Round1 { machine, pass };
            }
        }
    }
    let final_set = match best_source {
        BestSource::Round2 => last.set.clone(),
        BestSource::Round1 { machine, pass } => outputs[machine].solutions[pass].clone(),
    };
    let oracle_calls = outputs.iter().map(|o| o.calls).sum::<u64>() + last.oracle_calls + 1;

    Ok(RunReport {
        final_value: best_value,
        final_set,
        round1_values: outputs.iter().map(|o| o.values.clone()).collect(),
        round1_solutions: outputs.into_iter().map(|o| o.solutions).collect(),
        round2_solution: last.set,
        round2_value,
        best_source,
        communicated: merged.len(),
        oracle_calls,
        seed,
        wall_time: start.elapsed(),
    })
}

/// RandGreeDi on an instance with standard greedy in round one.
pub fn rand_greedi(
    inst: &Instance,
    m: usize,
    last_alg: &dyn SubsetSolver,
    seed: u64,
) -> Result<RunReport> {
    rand_greedi_with(
        &inst.objective,
        &inst.constraint,
        m,
        last_alg,
        GreedyOptions::default(),
        seed,
    )
}

pub fn rand_greedi_with(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    m: usize,
    last_alg: &dyn SubsetSolver,
    opts: GreedyOptions,
    seed: u64,
) -> Result<RunReport> {
    let partition = partition_random(f.ground_size(), m, seed)?;
    two_rounds(
        f,
        c,
        &partition,
        opts,
        FirstRound::Single,
        last_alg,
        Some(seed),
    )
}

/// NMRandGreeDi: repeated greedy per shard, composite on the last machine.
pub fn nm_rand_greedi(inst: &Instance, m: usize, seed: u64) -> Result<RunReport> {
    nm_rand_greedi_with(
        &inst.objective,
        &inst.constraint,
        m,
        GreedyOptions::default(),
        seed,
    )
}

pub fn nm_rand_greedi_with(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    m: usize,
    opts: GreedyOptions,
    seed: u64,
) -> Result<RunReport> {
    let partition = partition_random(f.ground_size(), m, seed)?;
    two_rounds(
        f,
        c,
        &partition,
        opts,
        FirstRound::Repeated,
        &NonMonotoneCompose(opts),
        Some(seed),
    )
}

/// NMRandGreeDi's structure on a caller-supplied partition.
pub fn nm_greedi_on_partition(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    partition: &Partition,
    opts: GreedyOptions,
    seed: u64,
) -> Result<RunReport> {
    two_rounds(
        f,
        c,
        partition,
        opts,
        FirstRound::Repeated,
        &NonMonotoneCompose(opts),
        Some(seed),
    )
}

/// Deterministic GreeDi on a fixed partition.
pub fn det_greedi(
    inst: &Instance,
    partition: &Partition,
    last_alg: &dyn SubsetSolver,
) -> Result<RunReport> {
    det_greedi_with(
        &inst.objective,
        &inst.constraint,
        partition,
        last_alg,
        GreedyOptions::default(),
    )
}

pub fn det_greedi_with(
    f: &dyn ValueOracle,
    c: &dyn Constraint,
    partition: &Partition,
    last_alg: &dyn SubsetSolver,
    opts: GreedyOptions,
) -> Result<RunReport> {
    two_rounds(f, c, partition, opts, FirstRound::Single, last_alg, None)
}

/// Standard greedy as the default last-round algorithm.
pub fn default_last_alg() -> Greedy {
    Greedy::default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{CardinalityConstraint, ConstraintOracle};
    use crate::greedy::greedy;
    use crate::objectives::{CoverageInstance, Objective};

    #[test]
    fn single_machine_gets_everything() {
        let p = partition_random(50, 1, 9).unwrap();
        assert!(p.assignment().iter().all(|&i| i == 0));
        assert!(partition_random(5, 0, 1).is_err());
    }

    #[test]
    fn random_partition_is_reproducible() {
        assert_eq!(
            partition_random(100, 7, 3).unwrap(),
            partition_random(100, 7, 3).unwrap()
        );
        assert_ne!(
            partition_random(100, 7, 3).unwrap(),
            partition_random(100, 7, 4).unwrap()
        );
    }

    #[test]
    fn fixed_strategies() {
        let b = partition_fixed(6, 2, &PartitionStrategy::Block).unwrap();
        assert_eq!(b.assignment(), &[0, 0, 0, 1, 1, 1]);
        let r = partition_fixed(6, 2, &PartitionStrategy::RoundRobin).unwrap();
        assert_eq!(r.assignment(), &[0, 1, 0, 1, 0, 1]);
        assert!(partition_fixed(3, 2, &PartitionStrategy::Explicit(vec![0, 1])).is_err());
        assert!(partition_fixed(2, 2, &PartitionStrategy::Explicit(vec![0, 2])).is_err());
        assert!(partition_fixed(2, 0, &PartitionStrategy::Block).is_err());
    }

    #[test]
    fn shards_cover_ground_set() {
        let p = partition_random(40, 5, 1).unwrap();
        let shards = p.shards();
        assert_eq!(shards.len(), 5);
        let all = shards.iter().fold(ElementSet::new(), |a, s| a.union(s));
        assert_eq!(all, ElementSet::full(40));
        assert_eq!(p.loads().iter().sum::<usize>(), 40);
    }

    fn identical_sets() -> Instance {
        let f = CoverageInstance::new(3, vec![vec![0, 1, 2]; 8]).unwrap();
        Instance::new(
            "identical",
            Objective::Coverage(f),
            ConstraintOracle::cardinality(2).unwrap(),
        )
    }

    #[test]
    fn identical_sets_give_single_set_value() {
        let inst = identical_sets();
        let r = rand_greedi(&inst, 3, &Greedy::default(), 5).unwrap();
        assert_eq!(r.final_value, 3.0);
        for v in r.round1_values.iter().flatten() {
            assert!(*v == 3.0 || *v == 0.0);
        }
    }

    #[test]
    fn m1_collapses_to_centralized() {
        let inst = identical_sets();
        let c = CardinalityConstraint::new(2).unwrap();
        let central = greedy(&ElementSet::full(8), &inst.objective, &c);
        let r = rand_greedi(&inst, 1, &Greedy::default(), 17).unwrap();
        assert_eq!(r.final_set, central.final_set);
    }

    #[test]
    fn partition_size_mismatch_rejected() {
        let inst = identical_sets();
        let p = partition_fixed(3, 1, &PartitionStrategy::Block).unwrap();
        assert!(det_greedi(&inst, &p, &Greedy::default()).is_err());
    }
}
