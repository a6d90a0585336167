//! Ground-set elements, canonical element sets, and fractional weight vectors.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index into the ground set `0..n`.
pub type ElementId = usize;

/// A set of distinct elements stored in ascending order.
///
/// Every constructor canonicalizes its input, so two sets with the same
/// members always compare equal and iterate identically.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<ElementId>", into = "Vec<ElementId>")]
pub struct ElementSet(Vec<ElementId>);

impl ElementSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_sorted_unchecked(members: Vec<ElementId>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self(members)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn as_slice(&self) -> &[ElementId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<ElementId> {
        self.0
    }

    pub fn max_element(&self) -> Option<ElementId> {
        self.0.last().copied()
    }

    /// Returns a copy with `e` inserted.
    pub fn with(&self, e: ElementId) -> Self {
        let mut out = self.0.clone();
        if let Err(pos) = out.binary_search(&e) {
            out.insert(pos, e);
        }
        Self(out)
    }

    /// Returns a copy with `e` removed.
    pub fn without(&self, e: ElementId) -> Self {
        let mut out = self.0.clone();
        if let Ok(pos) = out.binary_search(&e) {
            out.remove(pos);
        }
        Self(out)
    }

    pub fn union(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .copied()
                .filter(|&e| other.contains(e))
                .collect(),
        )
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .copied()
                .filter(|&e| !other.contains(e))
                .collect(),
        )
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.iter().all(|&e| other.contains(e))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.iter().all(|&e| !other.contains(e))
    }

    /// Fails if any member is outside `0..n`.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.max_element() {
            Some(e) if e >= n => Err(Error::ElementOutOfRange { element: e, n }),
            _ => Ok(()),
        }
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, ElementId>> {
        self.0.iter().copied()
    }
}

impl Deref for ElementSet {
    type Target = [ElementId];

    fn deref(&self) -> &[ElementId] {
        &self.0
    }
}

impl From<Vec<ElementId>> for ElementSet {
    fn from(mut members: Vec<ElementId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }
}

impl From<&[ElementId]> for ElementSet {
    fn from(members: &[ElementId]) -> Self {
        Self::from(members.to_vec())
    }
}

impl<const N: usize> From<[ElementId; N]> for ElementSet {
    fn from(members: [ElementId; N]) -> Self {
        Self::from(members.to_vec())
    }
}

impl From<ElementSet> for Vec<ElementId> {
    fn from(set: ElementSet) -> Self {
        set.0
    }
}

impl FromIterator<ElementId> for ElementSet {
    fn from_iter<I: IntoIterator<Item = ElementId>>(iter: I) -> Self {
        Self::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = ElementId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, ElementId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// A point of the unit cube `[0,1]^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::WeightOutOfRange { index, value });
        }
        Ok(Self(x))
    }

    /// The characteristic vector of `set` in dimension `n`.
    pub fn indicator(set: &ElementSet, n: usize) -> Self {
        let mut x = vec![0.0; n];
        for e in set {
            x[e] = 1.0;
        }
        Self(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!("scale {c} outside [0,1]")));
        }
        Ok(Self(self.0.iter().map(|v| v * c).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}
