use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::set::ElementId;

/// Maximum coverage: ground element `i` is the `i`-th set, and `f(S)` counts
/// the distinct universe items covered by the chosen sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CoverageData", into = "CoverageData")]
pub struct CoverageInstance {
    universe_size: usize,
    sets: Vec<Vec<u32>>,
    words: usize,
    bits: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct CoverageData {
    universe_size: usize,
    sets: Vec<Vec<u32>>,
}

impl TryFrom<CoverageData> for CoverageInstance {
    type Error = Error;

    fn try_from(data: CoverageData) -> Result<Self> {
        Self::new(data.universe_size, data.sets)
    }
}

impl From<CoverageInstance> for CoverageData {
    fn from(inst: CoverageInstance) -> Self {
        Self {
            universe_size: inst.universe_size,
            sets: inst.sets,
        }
    }
}

impl CoverageInstance {
    pub fn new(universe_size: usize, mut sets: Vec<Vec<u32>>) -> Result<Self> {
        let words = universe_size.div_ceil(64).max(1);
        let mut bits = vec![0u64; words * sets.len()];
        for (i, set) in sets.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            for &item in set.iter() {
                let item = item as usize;
                if item >= universe_size {
                    return Err(Error::InvalidParameter(format!(
                        "set {i} references item {item} outside universe of size {universe_size}"
                    )));
                }
                bits[i * words + item / 64] |= 1 << (item % 64);
            }
        }
        Ok(Self {
            universe_size,
            sets,
            words,
            bits,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    fn row(&self, e: ElementId) -> &[u64] {
        &self.bits[e * self.words..(e + 1) * self.words]
    }

    /// Bitmask of the items covered by `set`.
    pub fn covered(&self, set: &[ElementId]) -> Vec<u64> {
        let mut acc = vec![0u64; self.words];
        for &e in set {
            for (a, r) in acc.iter_mut().zip(self.row(e)) {
                *a |= r;
            }
        }
        acc
    }
}

impl ValueOracle for CoverageInstance {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn eval(&self, set: &[ElementId]) -> f64 {
        let count: u32 = self.covered(set).iter().map(|w| w.count_ones()).sum();
        f64::from(count)
    }

    fn monotone_hint(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_by_hand() {
        let f = CoverageInstance::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(f.eval(&[0, 1]), 3.0);
        assert_eq!(f.eval(&[]), 0.0);
        assert_eq!(f.eval(&[1]), 2.0);
    }

    #[test]
    fn rejects_out_of_universe_items() {
        assert!(CoverageInstance::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn wide_universe_crosses_word_boundary() {
        let f = CoverageInstance::new(130, vec![vec![0, 63, 64], vec![64, 129]]).unwrap();
        assert_eq!(f.eval(&[0, 1]), 4.0);
    }
}
