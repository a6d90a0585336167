//! Value-oracle interface and the exact Lovász extension.

use crate::error::{Error, Result};
use crate::set::{ElementId, ElementSet, WeightVector};

/// Absolute tolerance used by the Lovász scaling check.
pub const LOVASZ_TOL: f64 = 1e-9;

/// Black-box access to a non-negative set function over `0..ground_size()`.
///
/// `eval` receives distinct members in any order. Implementations hold no
/// mutable state and may be queried from several threads at once.
pub trait ValueOracle: Sync {
    fn ground_size(&self) -> usize;

    fn eval(&self, set: &[ElementId]) -> f64;

    /// Advisory only; algorithms never rely on it for correctness.
    fn monotone_hint(&self) -> bool {
        false
    }
}

impl<T: ValueOracle + ?Sized> ValueOracle for &T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn eval(&self, set: &[ElementId]) -> f64 {
        (**self).eval(set)
    }
    fn monotone_hint(&self) -> bool {
        (**self).monotone_hint()
    }
}

/// `f(S ∪ {e}) − f(S)`; negative values are possible for non-monotone `f`.
pub fn marginal_gain(f: &dyn ValueOracle, e: ElementId, set: &ElementSet) -> Result<f64> {
    let n = f.ground_size();
    if e >= n {
        return Err(Error::ElementOutOfRange { element: e, n });
    }
    set.check_bounds(n)?;
    if set.contains(e) {
        return Err(Error::ElementAlreadyPresent(e));
    }
    let mut with = set.as_slice().to_vec();
    with.push(e);
    Ok(f.eval(&with) - f.eval(set))
}

/// Exact value of `E_θ[f({i : x_i ≥ θ})]` for `θ ~ U(0,1)`.
///
/// Coordinates are visited in descending order (ties by ascending id) and each
/// prefix set is weighted by the length of its threshold interval. Prefixes
/// with a zero-length interval are skipped, so at most `n + 1` evaluations
/// are made.
pub fn lovasz_extension(f: &dyn ValueOracle, x: &WeightVector) -> Result<f64> {
    let n = f.ground_size();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let x = x.as_slice();
    let mut order: Vec<ElementId> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));

    let mut value = 0.0;
    let mut upper = 1.0;
    let mut prefix: Vec<ElementId> = Vec::with_capacity(n);
    for (pos, &e) in order.iter().enumerate() {
        let width = upper - x[e];
        if width > 0.0 {
            value += width * f.eval(&prefix);
        }
        prefix.push(e);
        upper = x[e];
        // The last prefix (all elements) still needs its interval below.
        if pos + 1 == n && upper > 0.0 {
            value += upper * f.eval(&prefix);
        }
    }
    if n == 0 {
        value = f.eval(&[]);
    }
    Ok(value)
}

/// Checks `f⁻(c·x) ≥ c·f⁻(x) − 1e-9`.
pub fn check_lovasz_scaling(f: &dyn ValueOracle, x: &WeightVector, c: f64) -> Result<bool> {
    let scaled = x.scaled(c)?;
    let lhs = lovasz_extension(f, &scaled)?;
    let rhs = c * lovasz_extension(f, x)?;
    Ok(lhs >= rhs - LOVASZ_TOL)
}
