use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The left branch on `[0, 1/2]`; the right branch is always `2x - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LeftBranch {
    /// `x (1 + (2x)^α)`, neutral fixed point at 0.
    Lsv { alpha: f64 },
    /// `2x`, the uniformly expanding control.
    Doubling,
}

impl LeftBranch {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            LeftBranch::Lsv { alpha } => x * (1.0 + (2.0 * x).powf(alpha)),
            LeftBranch::Doubling => 2.0 * x,
        }
    }

    /// The point of `[0, 1/2]` mapped to `y ∈ [0, 1]`.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            LeftBranch::Doubling => 0.5 * y,
            LeftBranch::Lsv { alpha } => lsv_left_inverse(y, alpha),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            LeftBranch::Lsv { alpha } => Some(alpha),
            LeftBranch::Doubling => None,
        }
    }
}

/// Full map on `[0, 1]`; `x = 1/2` belongs to the left branch.
#[inline]
pub fn apply_map(branch: &LeftBranch, x: f64) -> f64 {
    if x <= 0.5 {
        branch.apply(x)
    } else {
        2.0 * x - 1.0
    }
}

/// `T(x) = x(1 + 2^α x^α)` on `[0, 1/2]`, `2x - 1` on `(1/2, 1]`.
pub fn lsv_apply(x: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(x));
    }
    Ok(apply_map(&LeftBranch::Lsv { alpha }, x))
}

fn lsv_left_inverse(y: f64, alpha: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5;
    }
    let f = |x: f64| x * (1.0 + (2.0 * x).powf(alpha)) - y;
    let (mut lo, mut hi) = (0.0f64, y.min(0.5));
    // Newton from the upper end, kept inside the shrinking bracket
    let mut x = y / (1.0 + (2.0 * y).powf(alpha));
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dfx = 1.0 + (1.0 + alpha) * (2.0 * x).powf(alpha);
        let mut next = x - fx / dfx;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x {
            return next;
        }
        x = next;
    }
    x
}

/// `x_0 = 1/2` and `x_{k+1}` the left preimage of `x_k`, for `k < count`;
/// the result has `count + 1` entries indexed by `k`.
pub fn branch_points(alpha: f64, count: usize, tol: f64) -> Result<Vec<f64>> {
    branch_points_for(&LeftBranch::Lsv { alpha }, count, tol)
}

pub fn branch_points_for(branch: &LeftBranch, count: usize, tol: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("branch point count must be at least 1".into()));
    }
    let mut xs = Vec::with_capacity(count + 1);
    xs.push(0.5);
    for k in 0..count {
        let prev = xs[k];
        let next = branch.inverse(prev);
        let err = (branch.apply(next) - prev).abs();
        if !(next > 0.0 && next < prev) || err > tol.max(4.0 * f64::EPSILON * prev) {
            return Err(Error::SolverFailure(format!(
                "preimage of x_{k} = {prev:e} gave {next:e} (error {err:e})"
            )));
        }
        xs.push(next);
    }
    Ok(xs)
}
