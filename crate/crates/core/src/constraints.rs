//! Hereditary feasibility families exposed as membership oracles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{ElementId, ElementSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Cardinality,
    PartitionMatroid,
    Knapsack,
    PSystem,
}

impl ConstraintKind {
    pub fn is_matroid(self) -> bool {
        matches!(self, Self::Cardinality | Self::PartitionMatroid)
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cardinality => "cardinality",
            Self::PartitionMatroid => "partition_matroid",
            Self::Knapsack => "knapsack",
            Self::PSystem => "p_system",
        })
    }
}

/// Membership oracle for a hereditary family `I ⊆ 2^V`.
///
/// `is_feasible` receives distinct members in any order.
pub trait Constraint: Sync {
    fn kind(&self) -> ConstraintKind;

    fn is_feasible(&self, set: &[ElementId]) -> bool;

    /// Resource consumed by `e`; density greedy divides gains by this.
    fn element_cost(&self, _e: ElementId) -> f64 {
        1.0
    }
}

impl<T: Constraint + ?Sized> Constraint for &T {
    fn kind(&self) -> ConstraintKind {
        (**self).kind()
    }
    fn is_feasible(&self, set: &[ElementId]) -> bool {
        (**self).is_feasible(set)
    }
    fn element_cost(&self, e: ElementId) -> f64 {
        (**self).element_cost(e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardinalityConstraint {
    pub k: usize,
}

impl CardinalityConstraint {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "cardinality k must be positive".into(),
            ));
        }
        Ok(Self { k })
    }
}

impl Constraint for CardinalityConstraint {
    fn kind(&self) -> ConstraintKind {
        ConstraintKind::Cardinality
    }

    fn is_feasible(&self, set: &[ElementId]) -> bool {
        set.len() <= self.k
    }
}

/// At most `capacity[b]` elements from each block `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionMatroid {
    part_of: Vec<usize>,
    capacity: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(part_of: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        if let Some((e, &b)) = part_of
            .iter()
            .enumerate()
            .find(|(_, &b)| b >= capacity.len())
        {
            return Err(Error::InvalidParameter(format!(
                "element {e} assigned to block {b} but only {} blocks have capacities",
                capacity.len()
            )));
        }
        Ok(Self { part_of, capacity })
    }

    /// Every block gets the same capacity.
    pub fn uniform(part_of: Vec<usize>, capacity: usize) -> Result<Self> {
        let blocks = part_of.iter().max().map_or(0, |&b| b + 1);
        Self::new(part_of, vec![capacity; blocks])
    }

    pub fn block_of(&self, e: ElementId) -> usize {
        self.part_of[e]
    }

    pub fn blocks(&self) -> usize {
        self.capacity.len()
    }
}

impl Constraint for PartitionMatroid {
    fn kind(&self) -> ConstraintKind {
        ConstraintKind::PartitionMatroid
    }

    fn is_feasible(&self, set: &[ElementId]) -> bool {
        let mut used = vec![0usize; self.capacity.len()];
        for &e in set {
            let b = self.part_of[e];
            used[b] += 1;
            if used[b] > self.capacity[b] {
                return false;
            }
        }
        true
    }
}

/// `Σ_{i∈S} w_i ≤ budget`, inclusive with no tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackConstraint {
    weights: Vec<f64>,
    budget: f64,
}

impl KnapsackConstraint {
    pub fn new(weights: Vec<f64>, budget: f64) -> Result<Self> {
        if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "knapsack weights must be positive".into(),
            ));
        }
        if budget <= 0.0 || !budget.is_finite() {
            return Err(Error::InvalidParameter(
                "knapsack budget must be positive".into(),
            ));
        }
        Ok(Self { weights, budget })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

impl Constraint for KnapsackConstraint {
    fn kind(&self) -> ConstraintKind {
        ConstraintKind::Knapsack
    }

    fn is_feasible(&self, set: &[ElementId]) -> bool {
        set.iter().map(|&e| self.weights[e]).sum::<f64>() <= self.budget
    }

    fn element_cost(&self, e: ElementId) -> f64 {
        self.weights[e]
    }
}

/// Intersection of `p` matroids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PSystem {
    matroids: Vec<ConstraintOracle>,
}

impl PSystem {
    pub fn new(matroids: Vec<ConstraintOracle>) -> Result<Self> {
        if matroids.is_empty() {
            return Err(Error::InvalidParameter(
                "p-system needs at least one matroid".into(),
            ));
        }
        if let Some(c) = matroids.iter().find(|c| !c.kind().is_matroid()) {
            return Err(Error::InvalidParameter(format!(
                "p-system members must be matroids, got {}",
                c.kind()
            )));
        }
        Ok(Self { matroids })
    }

    pub fn p(&self) -> usize {
        self.matroids.len()
    }

    pub fn matroids(&self) -> &[ConstraintOracle] {
        &self.matroids
    }
}

impl Constraint for PSystem {
    fn kind(&self) -> ConstraintKind {
        ConstraintKind::PSystem
    }

    fn is_feasible(&self, set: &[ElementId]) -> bool {
        self.matroids.iter().all(|m| m.is_feasible(set))
    }
}

/// Closed set of constraints an instance can carry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintOracle {
    Cardinality(CardinalityConstraint),
    PartitionMatroid(PartitionMatroid),
    Knapsack(KnapsackConstraint),
    PSystem(PSystem),
}

impl ConstraintOracle {
    pub fn cardinality(k: usize) -> Result<Self> {
        CardinalityConstraint::new(k).map(Self::Cardinality)
    }

    fn inner(&self) -> &dyn Constraint {
        match self {
            Self::Cardinality(c) => c,
            Self::PartitionMatroid(c) => c,
            Self::Knapsack(c) => c,
            Self::PSystem(c) => c,
        }
    }

    /// The cardinality bound, when this is a plain cardinality constraint.
    pub fn cardinality_k(&self) -> Option<usize> {
        match self {
            Self::Cardinality(c) => Some(c.k),
            _ => None,
        }
    }
}

impl Constraint for ConstraintOracle {
    fn kind(&self) -> ConstraintKind {
        self.inner().kind()
    }

    fn is_feasible(&self, set: &[ElementId]) -> bool {
        self.inner().is_feasible(set)
    }

    fn element_cost(&self, e: ElementId) -> f64 {
        self.inner().element_cost(e)
    }
}

/// Elements `e ∈ pool \ S` with `S ∪ {e}` feasible.
pub fn extendable_candidates(
    c: &dyn Constraint,
    set: &ElementSet,
    pool: &ElementSet,
) -> Result<ElementSet> {
    if !c.is_feasible(set) {
        return Err(Error::Infeasible(set.to_string()));
    }
    let mut trial = set.as_slice().to_vec();
    let mut out = Vec::new();
    for e in pool.iter().filter(|&e| !set.contains(e)) {
        trial.push(e);
        if c.is_feasible(&trial) {
            out.push(e);
        }
        trial.pop();
    }
    Ok(ElementSet::from_sorted_unchecked(out))
}
