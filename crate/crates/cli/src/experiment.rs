//! Experiment cells: instance × k × algorithm × partition, each scored
//! against a reference value.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use rgreedi_core::constraints::{KnapsackConstraint, PSystem, PartitionMatroid};
use rgreedi_core::distributed::{
    det_greedi_with, nm_greedi_on_partition, nm_rand_greedi_with, rand_greedi_with,
};
use rgreedi_core::greedy::greedy_with;
use rgreedi_core::instances::{
    gen_diverse_relevant, gen_exemplar, gen_matroid_coverage, gen_random_coverage,
    gen_tight_instance, load_fimi,
};
use rgreedi_core::rng::derive_seed;
use rgreedi_core::verify::{brute_force_opt, EstimateReport, ENUMERATION_CAP};
use rgreedi_core::{
    partition_fixed, ConstraintOracle, Greedy, GreedyOptions, Instance, Partition, RunReport,
};

use crate::config::{Experiment, ExperimentConfig, ReferenceMode};
use crate::error::{CliError, Result};

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    #[serde(rename = "instance")]
    pub instance_name: String,
    pub algorithm: String,
    pub partition: String,
    pub k: usize,
    pub m: usize,
    /// `single`, `mean` or `se`, joined to the reference kind: `mean_opt`,
    /// `se_greedy`, ...
    pub stat: String,
    #[serde(serialize_with = "plain_decimal")]
    pub value: f64,
    /// Rounded to 6 significant digits at construction.
    #[serde(serialize_with = "six_significant")]
    pub ratio: f64,
    pub oracle_calls: u64,
    pub wall_ms: u64,
}

fn plain_decimal<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x}"))
}

fn six_significant<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_sig6(*x))
}

/// Decimal rendering with 6 significant digits and no exponent.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.999996 -> 10.00000)
    let carried: f64 = s.parse().unwrap_or(x);
    if carried.abs().log10().floor() as i32 > magnitude && decimals > 0 {
        let decimals = decimals - 1;
        return format!("{x:.decimals$}");
    }
    s
}

pub fn round_sig6(x: f64) -> f64 {
    format_sig6(x).parse().unwrap_or(x)
}

/// How a cell's reference value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    Opt,
    Greedy,
}

impl ReferenceKind {
    fn tag(self) -> &'static str {
        match self {
            ReferenceKind::Opt => "opt",
            ReferenceKind::Greedy => "greedy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub kind: ReferenceKind,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Algorithm {
    Greedy,
    RandGreedi,
    DetGreedi,
    NmRandGreedi,
    NmDetGreedi,
}

impl Algorithm {
    fn tag(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::RandGreedi => "rand_greedi",
            Algorithm::DetGreedi => "det_greedi",
            Algorithm::NmRandGreedi => "nm_rand_greedi",
            Algorithm::NmDetGreedi => "nm_det_greedi",
        }
    }

    fn randomized(&self) -> bool {
        matches!(self, Algorithm::RandGreedi | Algorithm::NmRandGreedi)
    }
}

/// A prepared instance at one `k`, with its reference and the options its
/// greedy runs use.
struct Prepared {
    inst: Instance,
    k: usize,
    m: usize,
    opts: GreedyOptions,
    reference: Reference,
    /// Named fixed partitions to run deterministic algorithms on.
    partitions: Vec<(String, Partition)>,
    algorithms: Vec<Algorithm>,
}

struct Cell {
    prepared: Arc<Prepared>,
    algorithm: Algorithm,
    partition: Option<(String, Partition)>,
}

/// A result row with the run it summarizes, when it is a single run.
#[derive(Clone, Debug)]
pub struct DetailedRow {
    pub row: ResultRow,
    pub report: Option<RunReport>,
}

/// Runs every cell of the experiment. Rows are sorted by (experiment,
/// instance, algorithm, partition, k, stat), so output does not depend on
/// scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_detailed(cfg)?
        .into_iter()
        .map(|d| d.row)
        .collect())
}

pub fn run_experiment_detailed(cfg: &ExperimentConfig) -> Result<Vec<DetailedRow>> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    let mut cells = Vec::new();
    for p in prepared {
        let p = Arc::new(p);
        for alg in &p.algorithms {
            match alg {
                Algorithm::DetGreedi | Algorithm::NmDetGreedi => {
                    for part in &p.partitions {
                        cells.push(Cell {
                            prepared: Arc::clone(&p),
                            algorithm: alg.clone(),
                            partition: Some(part.clone()),
                        });
                    }
                }
                _ => cells.push(Cell {
                    prepared: Arc::clone(&p),
                    algorithm: alg.clone(),
                    partition: None,
                }),
            }
        }
    }
    let rows: Vec<Vec<DetailedRow>> = cells
        .par_iter()
        .map(|c| run_cell(cfg, c))
        .collect::<Result<_>>()?;
    let mut rows: Vec<DetailedRow> = rows.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        let key = |r: &ResultRow| {
            (
                r.experiment.clone(),
                r.instance_name.clone(),
                r.algorithm.clone(),
                r.partition.clone(),
                r.k,
                r.stat.clone(),
            )
        };
        key(&a.row).cmp(&key(&b.row))
    });
    Ok(rows)
}

fn reference_for(inst: &Instance, opts: GreedyOptions, mode: ReferenceMode) -> Result<Reference> {
    let greedy_ref = || Reference {
        kind: ReferenceKind::Greedy,
        value: greedy_with(&inst.ground(), &inst.objective, &inst.constraint, opts).value,
    };
    let exact = || -> Result<Reference> {
        let value = match inst.known_opt {
            Some(v) => v,
            None => brute_force_opt(&inst.ground(), &inst.objective, &inst.constraint)?.opt_value,
        };
        Ok(Reference {
            kind: ReferenceKind::Opt,
            value,
        })
    };
    let enumerable = inst.known_opt.is_some() || inst.n() <= ENUMERATION_CAP;
    match mode {
        ReferenceMode::Greedy => Ok(greedy_ref()),
        ReferenceMode::Opt if !enumerable => Err(CliError::TooLarge {
            name: inst.name.clone(),
            n: inst.n(),
            cap: ENUMERATION_CAP,
        }),
        ReferenceMode::Opt => exact(),
        ReferenceMode::Auto if enumerable => exact(),
        ReferenceMode::Auto => Ok(greedy_ref()),
    }
}

fn fixed_partitions(
    cfg: &ExperimentConfig,
    n: usize,
    m: usize,
) -> Result<Vec<(String, Partition)>> {
    cfg.partition_strategies
        .iter()
        .map(|s| Ok((s.tag().to_string(), partition_fixed(n, m, &s.strategy())?)))
        .collect()
}

fn prepare(cfg: &ExperimentConfig) -> Result<Vec<Prepared>> {
    use Algorithm::*;
    let monotone = vec![Greedy, RandGreedi, DetGreedi];
    let mut specs: Vec<(Instance, usize, usize, GreedyOptions, Vec<Algorithm>)> = Vec::new();
    match cfg.experiment {
        Experiment::CoverageRatio => {
            let base = match &cfg.fimi {
                Some(path) => load_fimi(path, 1)?,
                None => {
                    gen_random_coverage(cfg.n, cfg.universe, cfg.density, 1, cfg.instance_seed)?
                }
            };
            for &k in &cfg.k_range {
                specs.push((
                    base.clone().with_cardinality(k)?,
                    k,
                    cfg.m,
                    GreedyOptions::lazy(),
                    monotone.clone(),
                ));
            }
        }
        Experiment::Exemplar => {
            let base = gen_exemplar(cfg.n, cfg.dim, 1, cfg.instance_seed)?;
            for &k in &cfg.k_range {
                specs.push((
                    base.clone().with_cardinality(k)?,
                    k,
                    cfg.m,
                    GreedyOptions::lazy(),
                    monotone.clone(),
                ));
            }
        }
        Experiment::Diversity => {
            for &k in &cfg.k_range {
                let inst = gen_diverse_relevant(cfg.n, k, cfg.instance_seed)?;
                let algs = vec![Greedy, RandGreedi, NmRandGreedi, NmDetGreedi];
                specs.push((inst, k, cfg.m, GreedyOptions::default(), algs));
            }
        }
        Experiment::MatroidEllipse => {
            let base =
                gen_matroid_coverage(cfg.facilities, cfg.modes, cfg.grid, 1, cfg.instance_seed)?;
            for &k in &cfg.k_range {
                specs.push((
                    base.clone().with_cardinality(k)?,
                    k,
                    cfg.m,
                    GreedyOptions::lazy(),
                    monotone.clone(),
                ));
            }
        }
        Experiment::TightInstance => {
            let inst = gen_tight_instance(cfg.l)?;
            let k = inst
                .constraint
                .cardinality_k()
                .expect("tight instance is cardinality-constrained");
            let part = inst
                .adversarial_partition
                .clone()
                .expect("tight instance has a partition");
            let m = part.machines();
            let opts = GreedyOptions::default();
            let reference = reference_for(&inst, opts, cfg.reference)?;
            return Ok(vec![Prepared {
                inst,
                k,
                m,
                opts,
                reference,
                partitions: vec![("adversarial".to_string(), part)],
                algorithms: vec![Greedy, RandGreedi, DetGreedi],
            }]);
        }
        Experiment::BoundSuite => {
            for &k in &cfg.k_range {
                for inst in bound_suite_instances(cfg, k)? {
                    let opts = match inst.constraint {
                        ConstraintOracle::Knapsack(_) => GreedyOptions::density(),
                        _ => GreedyOptions::default(),
                    };
                    specs.push((inst, k, cfg.m, opts, vec![Greedy, RandGreedi]));
                }
            }
        }
    }
    specs
        .into_par_iter()
        .map(|(inst, k, m, opts, algorithms)| {
            let reference = reference_for(&inst, opts, cfg.reference)?;
            let partitions = fixed_partitions(cfg, inst.n(), m)?;
            Ok(Prepared {
                inst,
                k,
                m,
                opts,
                reference,
                partitions,
                algorithms,
            })
        })
        .collect()
}

/// Small random-coverage instances under each constraint class, with `k`
/// bounding the solution size.
pub fn bound_suite_instances(cfg: &ExperimentConfig, k: usize) -> Result<Vec<Instance>> {
    let base = gen_random_coverage(cfg.n, cfg.universe, cfg.density, k, cfg.instance_seed)?;
    let n = base.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.instance_seed);
    let blocks = (n / 3).max(1);
    let part: Vec<usize> = (0..n).map(|_| rng.random_range(0..blocks)).collect();
    let weights: Vec<f64> = (0..n)
        .map(|_| f64::from(rng.random_range(1u8..=4)))
        .collect();
    let budget = 2.0 * k as f64;

    let with = |name: &str, constraint: ConstraintOracle| {
        let mut inst = base.clone();
        inst.name = format!("bound_{name}_n{n}_s{}", cfg.instance_seed);
        inst.constraint = constraint;
        inst
    };
    let matroid = ConstraintOracle::PartitionMatroid(PartitionMatroid::uniform(part.clone(), 1)?);
    Ok(vec![
        with("cardinality", ConstraintOracle::cardinality(k)?),
        with(
            "partition_matroid",
            ConstraintOracle::PartitionMatroid(PartitionMatroid::uniform(
                part,
                k.div_ceil(blocks).max(1),
            )?),
        ),
        with(
            "p_system",
            ConstraintOracle::PSystem(PSystem::new(vec![
                ConstraintOracle::cardinality(k)?,
                matroid,
            ])?),
        ),
        with(
            "knapsack",
            ConstraintOracle::Knapsack(KnapsackConstraint::new(weights, budget)?),
        ),
    ])
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<Vec<DetailedRow>> {
    let p = &cell.prepared;
    let (f, c) = (&p.inst.objective, &p.inst.constraint);
    let last = Greedy(p.opts);
    let start = Instant::now();
    let run = |seed: u64| -> Result<RunReport> {
        let report = match (&cell.algorithm, &cell.partition) {
            (Algorithm::RandGreedi, _) => rand_greedi_with(f, c, p.m, &last, p.opts, seed)?,
            (Algorithm::NmRandGreedi, _) => nm_rand_greedi_with(f, c, p.m, p.opts, seed)?,
            (Algorithm::DetGreedi, Some((_, part))) => det_greedi_with(f, c, part, &last, p.opts)?,
            (Algorithm::NmDetGreedi, Some((_, part))) => {
                nm_greedi_on_partition(f, c, part, p.opts, seed)?
            }
            _ => unreachable!("fixed-partition algorithm without a partition"),
        };
        Ok(report)
    };

    let (partition, m) = match (&cell.algorithm, &cell.partition) {
        (Algorithm::Greedy, _) => ("none".to_string(), 1),
        (_, Some((name, _))) => (name.clone(), p.m),
        _ => ("random".to_string(), p.m),
    };
    let row = |stat: &str, value: f64, ratio: f64, calls: u64, wall_ms: u64| ResultRow {
        experiment: cfg.experiment.tag().to_string(),
        instance_name: p.inst.name.clone(),
        algorithm: cell.algorithm.tag().to_string(),
        partition: partition.clone(),
        k: p.k,
        m,
        stat: format!("{stat}_{}", p.reference.kind.tag()),
        value,
        ratio: round_sig6(ratio),
        oracle_calls: calls,
        wall_ms,
    };
    let ratio_of = |v: f64| {
        if p.reference.value > 0.0 {
            v / p.reference.value
        } else {
            1.0
        }
    };
    let elapsed = |start: Instant| {
        if cfg.timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        }
    };

    if cell.algorithm == Algorithm::Greedy {
        let t = greedy_with(&p.inst.ground(), f, c, p.opts);
        return Ok(vec![DetailedRow {
            row: row(
                "single",
                t.value,
                ratio_of(t.value),
                t.oracle_calls,
                elapsed(start),
            ),
            report: None,
        }]);
    }
    if !cell.algorithm.randomized() || cfg.trials == 1 {
        let report = run(cfg.seed)?;
        return Ok(vec![DetailedRow {
            row: row(
                "single",
                report.final_value,
                ratio_of(report.final_value),
                report.oracle_calls,
                elapsed(start),
            ),
            report: Some(report),
        }]);
    }

    let reports: Vec<RunReport> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run(derive_seed(cfg.seed, t)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = reports.iter().map(|r| r.final_value).collect();
    let est = EstimateReport::from_samples(&values, cfg.seed)?;
    let calls = reports.iter().map(|r| r.oracle_calls).sum::<u64>() / cfg.trials as u64;
    let wall = elapsed(start);
    Ok(vec![
        DetailedRow {
            row: row("mean", est.mean, ratio_of(est.mean), calls, wall),
            report: None,
        },
        DetailedRow {
            row: row("se", est.std_error, ratio_of(est.std_error), calls, wall),
            report: None,
        },
    ])
}
