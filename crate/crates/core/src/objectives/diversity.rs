use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::set::ElementId;

/// Relevance minus redundancy:
/// `f(A) = Σ_{i∈V} Σ_{j∈A} s_ij − λ Σ_{i,j∈A} s_ij`.
///
/// The penalty counts each unordered pair `{i, j}`, `i ≠ j`, once. With
/// `λ ≤ 2` the value is non-negative on every subset; larger `λ` can drive it
/// negative on large sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DiversityData", into = "DiversityData")]
pub struct DiversityInstance {
    n: usize,
    similarity: Vec<f64>,
    lambda: f64,
    relevance: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DiversityData {
    n: usize,
    lambda: f64,
    similarity: Vec<f64>,
}

impl TryFrom<DiversityData> for DiversityInstance {
    type Error = Error;

    fn try_from(d: DiversityData) -> Result<Self> {
        Self::new(d.n, d.similarity, d.lambda)
    }
}

impl From<DiversityInstance> for DiversityData {
    fn from(d: DiversityInstance) -> Self {
        Self {
            n: d.n,
            lambda: d.lambda,
            similarity: d.similarity,
        }
    }
}

impl DiversityInstance {
    /// `similarity` is row-major `n × n` with non-negative entries.
    pub fn new(n: usize, similarity: Vec<f64>, lambda: f64) -> Result<Self> {
        if similarity.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "similarity has {} entries, expected {}",
                similarity.len(),
                n * n
            )));
        }
        if similarity.iter().any(|&s| s < 0.0 || !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "similarity entries must be finite and non-negative".into(),
            ));
        }
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda {lambda} must be >= 0"
            )));
        }
        let relevance = (0..n)
            .map(|j| (0..n).map(|i| similarity[i * n + j]).sum())
            .collect();
        Ok(Self {
            n,
            similarity,
            lambda,
            relevance,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn similarity(&self, i: ElementId, j: ElementId) -> f64 {
        self.similarity[i * self.n + j]
    }
}

impl ValueOracle for DiversityInstance {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &[ElementId]) -> f64 {
        let relevance: f64 = set.iter().map(|&j| self.relevance[j]).sum();
        let mut redundancy = 0.0;
        for (a, &i) in set.iter().enumerate() {
            let row = &self.similarity[i * self.n..(i + 1) * self.n];
            for &j in &set[a + 1..] {
                redundancy += row[j];
            }
        }
        relevance - self.lambda * redundancy
    }
}
