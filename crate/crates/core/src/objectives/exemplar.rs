use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::rng::CounterRng;
use crate::set::{ElementId, ElementSet};

/// Exemplar-based clustering with squared Euclidean dissimilarity.
///
/// `f(S) = L({v0}) − L(S ∪ {v0})` where `L(A)` is the mean over evaluation
/// points of the distance to the closest member of `A`, and `v0` is the zero
/// vector. Evaluation points default to the whole ground set; a sampled or
/// restricted subset can be substituted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExemplarInstance {
    dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eval_points: Option<Vec<ElementId>>,
}

impl ExemplarInstance {
    /// Uses `points` as given.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "point {i} has dimension {}, expected {dim}",
                points[i].len()
            )));
        }
        Ok(Self {
            dim,
            points,
            eval_points: None,
        })
    }

    /// Subtracts each vector's mean coordinate, then scales it to unit norm.
    /// Vectors that are zero after centering are kept as zero.
    pub fn normalized(mut points: Vec<Vec<f64>>) -> Result<Self> {
        for p in points.iter_mut() {
            if p.is_empty() {
                continue;
            }
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            p.iter_mut().for_each(|v| *v -= mean);
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                p.iter_mut().for_each(|v| *v /= norm);
            }
        }
        Self::new(points)
    }

    /// Evaluates the loss over `sample_size` points drawn without replacement
    /// instead of over the whole ground set.
    pub fn with_sample(mut self, sample_size: usize, seed: u64) -> Result<Self> {
        let n = self.points.len();
        if sample_size == 0 || sample_size > n {
            return Err(Error::InvalidParameter(format!(
                "sample size {sample_size} not in 1..={n}"
            )));
        }
        // partial Fisher-Yates
        let mut rng = CounterRng::new(seed, crate::rng::STREAM_ALGORITHM);
        let mut idx: Vec<ElementId> = (0..n).collect();
        for i in 0..sample_size {
            let j = i + rng.below(i as u64, (n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(sample_size);
        idx.sort_unstable();
        self.eval_points = Some(idx);
        Ok(self)
    }

    /// Evaluates the loss only over `points`, as a machine holding a shard would.
    pub fn restricted_to(mut self, points: &ElementSet) -> Result<Self> {
        points.check_bounds(self.points.len())?;
        self.eval_points = Some(points.as_slice().to_vec());
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dissimilarity(&self, a: ElementId, b: ElementId) -> f64 {
        sq_dist(&self.points[a], &self.points[b])
    }

    fn eval_over<I: Iterator<Item = ElementId>>(&self, set: &[ElementId], pts: I) -> (f64, usize) {
        let mut total = 0.0;
        let mut count = 0;
        for v in pts {
            let base = sq_norm(&self.points[v]);
            let mut best = base;
            for &a in set {
                let d = sq_dist(&self.points[a], &self.points[v]);
                if d < best {
                    best = d;
                }
            }
            total += base - best;
            count += 1;
        }
        (total, count)
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl ValueOracle for ExemplarInstance {
    fn ground_size(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, set: &[ElementId]) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let (total, count) = match &self.eval_points {
            Some(pts) => self.eval_over(set, pts.iter().copied()),
            None => self.eval_over(set, 0..self.points.len()),
        };
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }

    fn monotone_hint(&self) -> bool {
        true
    }
}
