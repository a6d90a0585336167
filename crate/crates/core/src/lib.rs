//! Randomized two-round distributed greedy (RandGreeDi / NMRandGreeDi) for
//! submodular maximization under hereditary constraints, plus the objectives,
//! constraints, baselines and exhaustive checkers needed to verify it.

pub mod constraints;
pub mod distributed;
pub mod error;
pub mod greedy;
pub mod instances;
pub mod objectives;
pub mod oracle;
pub mod rng;
pub mod set;
pub mod verify;

pub use constraints::{Constraint, ConstraintKind, ConstraintOracle};
pub use distributed::{
    det_greedi, nm_rand_greedi, partition_fixed, partition_random, rand_greedi, BestSource,
    Partition, PartitionStrategy, RunReport,
};
pub use error::{Error, Result};
pub use greedy::{
    double_greedy_unconstrained, greedy, nonmonotone_compose, repeated_greedy, Greedy,
    GreedyOptions, GreedyTrace, NonMonotoneCompose, Solution, SubsetSolver,
};
pub use instances::Instance;
pub use objectives::Objective;
pub use oracle::{lovasz_extension, marginal_gain, ValueOracle};
pub use set::{ElementId, ElementSet, WeightVector};
