//! Concrete submodular objectives.

mod coverage;
mod diversity;
mod exemplar;

use serde::{Deserialize, Serialize};

pub use coverage::CoverageInstance;
pub use diversity::DiversityInstance;
pub use exemplar::ExemplarInstance;

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::set::ElementId;

/// Additive objective `f(S) = Σ_{e∈S} w_e`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModularInstance {
    weights: Vec<f64>,
}

impl ModularInstance {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "modular weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl ValueOracle for ModularInstance {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, set: &[ElementId]) -> f64 {
        set.iter().map(|&e| self.weights[e]).sum()
    }

    fn monotone_hint(&self) -> bool {
        true
    }
}

/// Closed set of objectives an [`Instance`](crate::instances::Instance) can carry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    Coverage(CoverageInstance),
    Exemplar(ExemplarInstance),
    Diversity(DiversityInstance),
    Modular(ModularInstance),
}

impl Objective {
    pub fn as_oracle(&self) -> &dyn ValueOracle {
        match self {
            Objective::Coverage(f) => f,
            Objective::Exemplar(f) => f,
            Objective::Diversity(f) => f,
            Objective::Modular(f) => f,
        }
    }
}

impl ValueOracle for Objective {
    fn ground_size(&self) -> usize {
        self.as_oracle().ground_size()
    }

    fn eval(&self, set: &[ElementId]) -> f64 {
        self.as_oracle().eval(set)
    }

    fn monotone_hint(&self) -> bool {
        self.as_oracle().monotone_hint()
    }
}
