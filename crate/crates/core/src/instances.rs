//! Instance bundles, generators, and FIMI transaction ingestion.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constraints::{ConstraintOracle, PSystem, PartitionMatroid};
use crate::distributed::{partition_fixed, Partition, PartitionStrategy};
use crate::error::{Error, Result};
use crate::objectives::{CoverageInstance, DiversityInstance, ExemplarInstance, Objective};
use crate::oracle::ValueOracle;
use crate::set::{ElementId, ElementSet};

/// A ground set with its objective and constraint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub objective: Objective,
    pub constraint: ConstraintOracle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_opt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_opt_set: Option<ElementSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversarial_partition: Option<Partition>,
    /// Original item ids of a FIMI file, indexed by dense universe item.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_ids: Option<Vec<u64>>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        objective: Objective,
        constraint: ConstraintOracle,
    ) -> Self {
        Self {
            name: name.into(),
            objective,
            constraint,
            known_opt: None,
            known_opt_set: None,
            adversarial_partition: None,
            item_ids: None,
        }
    }

    pub fn n(&self) -> usize {
        self.objective.ground_size()
    }

    pub fn ground(&self) -> ElementSet {
        ElementSet::full(self.n())
    }

    /// Replaces the cardinality bound, either the whole constraint or the
    /// cardinality member of a p-system.
    pub fn with_cardinality(mut self, k: usize) -> Result<Self> {
        let card = ConstraintOracle::cardinality(k)?;
        self.constraint = match self.constraint {
            ConstraintOracle::Cardinality(_) => card,
            ConstraintOracle::PSystem(ps) => {
                let members = ps
                    .matroids()
                    .iter()
                    .map(|m| match m {
                        ConstraintOracle::Cardinality(_) => card.clone(),
                        other => other.clone(),
                    })
                    .collect();
                ConstraintOracle::PSystem(PSystem::new(members)?)
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "instance constraint {} has no cardinality bound",
                    crate::constraints::Constraint::kind(&other)
                )))
            }
        };
        self.known_opt = None;
        self.known_opt_set = None;
        Ok(self)
    }

    /// Stable hex digest of the serialized instance.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instance serializes");
        let hash = Sha256::digest(&bytes);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Max-k-coverage family on which deterministic GreeDi with an adversarial
/// partition does poorly.
///
/// Machine 0 holds `O_1..O_l` and `k` empty sets. Machine `t = 1..l²` holds
/// the `l` fooling sets `O_j ∪ {x_{t,j}}`, then `k` empty sets, then `O'_t`,
/// where `O'_t = {x_{t,1}, .., x_{t,l}}`. Ids run machine by machine in that
/// order, so after the fooling sets the empty sets win every zero-gain tie.
pub fn gen_tight_instance(l: usize) -> Result<Instance> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "tight instance needs l >= 2, got {l}"
        )));
    }
    let k = l + l * l;
    let universe = l * l + l * l * l;
    let machines = l * l + 1;
    let block = |j: usize| -> Vec<u32> { ((j * l)..((j + 1) * l)).map(|x| x as u32).collect() };
    let extra = |t: usize, j: usize| -> u32 { (l * l + t * l + j) as u32 };

    let mut sets: Vec<Vec<u32>> = Vec::new();
    let mut machine_of = Vec::new();
    let mut opt = Vec::new();

    for j in 0..l {
        opt.push(sets.len());
        sets.push(block(j));
        machine_of.push(0);
    }
    for _ in 0..k {
        sets.push(Vec::new());
        machine_of.push(0);
    }
    for t in 0..l * l {
        let machine = t + 1;
        for j in 0..l {
            let mut s = block(j);
            s.push(extra(t, j));
            sets.push(s);
            machine_of.push(machine);
        }
        for _ in 0..k {
            sets.push(Vec::new());
            machine_of.push(machine);
        }
        opt.push(sets.len());
        sets.push((0..l).map(|j| extra(t, j)).collect());
        machine_of.push(machine);
    }

    let n = sets.len();
    let coverage = CoverageInstance::new(universe, sets)?;
    let mut inst = Instance::new(
        format!("tight_l{l}"),
        Objective::Coverage(coverage),
        ConstraintOracle::cardinality(k)?,
    );
    inst.known_opt = Some(universe as f64);
    inst.known_opt_set = Some(ElementSet::from(opt));
    inst.adversarial_partition = Some(partition_fixed(
        n,
        machines,
        &PartitionStrategy::Explicit(machine_of),
    )?);
    Ok(inst)
}

fn symmetric_uniform(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(0.0..100.0);
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    s
}

/// Largest ground set on which generators enumerate small sets to check
/// non-negativity.
const NONNEG_CHECK_MAX_N: usize = 16;

fn check_nonneg_up_to(f: &dyn ValueOracle, k: usize) -> Result<()> {
    let n = f.ground_size();
    if n > NONNEG_CHECK_MAX_N {
        return Ok(());
    }
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let set: Vec<ElementId> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
        let v = f.eval(&set);
        if v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "generated objective is negative ({v}) on feasible set {set:?}"
            )));
        }
    }
    Ok(())
}

/// Diverse-yet-relevant selection: symmetric `U(0,100)` similarities with zero
/// diagonal, `λ = n/k`, and a cardinality-`k` constraint.
pub fn gen_diverse_relevant(n: usize, k: usize, seed: u64) -> Result<Instance> {
    if k == 0 || n < k {
        return Err(Error::InvalidParameter(format!(
            "need n >= k >= 1, got n={n} k={k}"
        )));
    }
    let inst = gen_diversity(n, n as f64 / k as f64, k, seed)?;
    check_nonneg_up_to(&inst.objective, k)?;
    Ok(Instance {
        name: format!("diverse_n{n}_k{k}_s{seed}"),
        ..inst
    })
}

/// Same similarity model with a caller-chosen `λ`. With `λ ≤ 2` the objective
/// is non-negative on every subset.
pub fn gen_diversity(n: usize, lambda: f64, k: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = symmetric_uniform(n, &mut rng);
    let f = DiversityInstance::new(n, s, lambda)?;
    Ok(Instance::new(
        format!("diversity_n{n}_l{lambda}_s{seed}"),
        Objective::Diversity(f),
        ConstraintOracle::cardinality(k.max(1))?,
    ))
}

/// An ellipse-shaped coverage profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub rotation: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let (sin, cos) = self.rotation.sin_cos();
        let u = dx * cos + dy * sin;
        let v = -dx * sin + dy * cos;
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2) <= 1.0
    }
}

/// Facility placement with `r` elliptical modes per facility; at most `k`
/// ellipses and at most one per facility.
///
/// Demand points sit at the cell centers of a `demand_grid × demand_grid`
/// lattice over the unit square; facilities likewise on the smallest square
/// lattice that fits them. Each ellipse has major axis `0.1·s` and minor axis
/// `0.1/s` with `s ~ N(3, 1/3)` (variance) and rotation `U(0, 2π)`. Element
/// `facility·r + mode` is the ground-set id.
pub fn gen_matroid_coverage(
    n_facilities: usize,
    r: usize,
    demand_grid: usize,
    k: usize,
    seed: u64,
) -> Result<Instance> {
    if n_facilities == 0 || r == 0 || demand_grid == 0 {
        return Err(Error::InvalidParameter(
            "facility, mode and grid counts must be >= 1".into(),
        ));
    }
    let (ellipses, owner) = gen_ellipses(n_facilities, r, seed);
    let g = demand_grid as f64;
    let sets = ellipses
        .iter()
        .map(|el| {
            let mut covered = Vec::new();
            for a in 0..demand_grid {
                for b in 0..demand_grid {
                    if el.contains((a as f64 + 0.5) / g, (b as f64 + 0.5) / g) {
                        covered.push((a * demand_grid + b) as u32);
                    }
                }
            }
            covered
        })
        .collect();
    let coverage = CoverageInstance::new(demand_grid * demand_grid, sets)?;
    let partition = PartitionMatroid::uniform(owner, 1)?;
    let constraint = PSystem::new(vec![
        ConstraintOracle::cardinality(k)?,
        ConstraintOracle::PartitionMatroid(partition),
    ])?;
    Ok(Instance::new(
        format!("ellipse_f{n_facilities}_r{r}_g{demand_grid}_s{seed}"),
        Objective::Coverage(coverage),
        ConstraintOracle::PSystem(constraint),
    ))
}

/// The ellipses of [`gen_matroid_coverage`] and each one's facility.
pub fn gen_ellipses(n_facilities: usize, r: usize, seed: u64) -> (Vec<Ellipse>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (n_facilities as f64).sqrt().ceil() as usize;
    let shape = Normal::new(3.0, (1.0f64 / 3.0).sqrt()).expect("valid normal");
    let mut ellipses = Vec::with_capacity(n_facilities * r);
    let mut owner = Vec::with_capacity(n_facilities * r);
    for fac in 0..n_facilities {
        let cx = ((fac % side) as f64 + 0.5) / side as f64;
        let cy = ((fac / side) as f64 + 0.5) / side as f64;
        for _ in 0..r {
            // keep the axes positive and finite
            let s: f64 = shape.sample(&mut rng).max(0.1);
            let rotation = rng.random_range(0.0..std::f64::consts::TAU);
            ellipses.push(Ellipse {
                cx,
                cy,
                semi_major: 0.05 * s,
                semi_minor: 0.05 / s,
                rotation,
            });
            owner.push(fac);
        }
    }
    (ellipses, owner)
}

/// Reads a FIMI transaction file: one transaction per line, items as
/// whitespace-separated non-negative integers. Transaction `i` becomes set
/// `i`; item ids are densely re-indexed in first-occurrence order.
pub fn load_fimi(path: impl AsRef<Path>, k: usize) -> Result<Instance> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_fimi(BufReader::new(file), path, k)
}

/// [`load_fimi`] over any reader; `path` only labels errors.
pub fn parse_fimi<R: BufRead>(reader: R, path: &Path, k: usize) -> Result<Instance> {
    let mut dense: HashMap<u64, u32> = HashMap::new();
    let mut item_ids: Vec<u64> = Vec::new();
    let mut sets: Vec<Vec<u32>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut set = Vec::new();
        for token in line.split_whitespace() {
            let id: u64 = token.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("invalid item id {token:?}"),
            })?;
            let next = item_ids.len() as u32;
            let idx = *dense.entry(id).or_insert_with(|| {
                item_ids.push(id);
                next
            });
            set.push(idx);
        }
        sets.push(set);
    }
    if sets.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no transactions".into(),
        });
    }
    let coverage = CoverageInstance::new(item_ids.len(), sets)?;
    let name = path
        .file_stem()
        .map_or_else(|| "fimi".to_string(), |s| s.to_string_lossy().into_owned());
    let mut inst = Instance::new(
        name,
        Objective::Coverage(coverage),
        ConstraintOracle::cardinality(k)?,
    );
    inst.item_ids = Some(item_ids);
    Ok(inst)
}

/// Random coverage: each (set, item) membership independently with
/// probability `density ∈ (0, 1]`.
pub fn gen_random_coverage(
    n_sets: usize,
    universe: usize,
    density: f64,
    k: usize,
    seed: u64,
) -> Result<Instance> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density {density} not in (0,1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = (0..n_sets)
        .map(|_| {
            (0..universe as u32)
                .filter(|_| rng.random_bool(density))
                .collect()
        })
        .collect();
    let coverage = CoverageInstance::new(universe, sets)?;
    Ok(Instance::new(
        format!("coverage_n{n_sets}_u{universe}_s{seed}"),
        Objective::Coverage(coverage),
        ConstraintOracle::cardinality(k)?,
    ))
}

/// Exemplar clustering over `n` Gaussian vectors in dimension `d`, centered
/// and unit-normalized.
pub fn gen_exemplar(n: usize, d: usize, k: usize, seed: u64) -> Result<Instance> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("exemplar needs n, d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let f = ExemplarInstance::normalized(points)?;
    Ok(Instance::new(
        format!("exemplar_n{n}_d{d}_s{seed}"),
        Objective::Exemplar(f),
        ConstraintOracle::cardinality(k)?,
    ))
}
