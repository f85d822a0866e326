use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::OperatorSeq;
use crate::error::{Error, Result};

/// Default half-width of the arc around `θ = 0` left out of the scan.
pub const DEFAULT_EXCLUDED_ARC: f64 = PI / 8.0;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AperiodicityReport {
    pub min_singular_value: f64,
    pub argmin_angle: f64,
    /// Bound on the effect of the terms past the horizon, which are not
    /// included in `R(z)`; singular values may shift by at most this much.
    pub tail_bound: f64,
    pub points_scanned: usize,
}

/// Smallest singular value of `I - R(e^{iθ})` over `θ_j = 2πj/G` with
/// `|θ| >= π/8` (angles taken in `(-π, π]`).
pub fn aperiodicity_check(r: &OperatorSeq, grid_points: usize) -> Result<AperiodicityReport> {
    aperiodicity_check_with_arc(r, grid_points, DEFAULT_EXCLUDED_ARC)
}

pub fn aperiodicity_check_with_arc(
    r: &OperatorSeq,
    grid_points: usize,
    excluded_arc: f64,
) -> Result<AperiodicityReport> {
    if grid_points < 8 {
        return Err(Error::InvalidInput(format!("grid_points = {grid_points} < 8")));
    }
    if !(0.0..PI).contains(&excluded_arc) {
        return Err(Error::InvalidInput(format!("excluded arc {excluded_arc} not in [0, π)")));
    }
    let d = r.dim();
    let identity = DMatrix::<Complex<f64>>::identity(d, d);
    let mut best = (f64::INFINITY, f64::NAN);
    let mut scanned = 0;
    for j in 0..grid_points {
        let theta = 2.0 * PI * j as f64 / grid_points as f64;
        let wrapped = if theta > PI { theta - 2.0 * PI } else { theta };
        if wrapped.abs() < excluded_arc - 1e-12 {
            continue;
        }
        scanned += 1;
        let z = Complex::from_polar(1.0, theta);
        let m = &identity - r.eval_stored(z);
        let sigma = if d == 1 {
            m[(0, 0)].norm()
        } else {
            m.singular_values().iter().fold(f64::INFINITY, |a, &s| a.min(s))
        };
        if sigma < best.0 {
            best = (sigma, theta);
        }
    }
    Ok(AperiodicityReport {
        min_singular_value: best.0,
        argmin_angle: best.1,
        tail_bound: r.continuation_bound(),
        points_scanned: scanned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_two_vanishes_at_pi() {
        let r = OperatorSeq::scalar(&[0.0, 1.0], 2.0).unwrap();
        let rep = aperiodicity_check(&r, 1024).unwrap();
        assert!(rep.min_singular_value < 1e-8);
        assert!((rep.argmin_angle - PI).abs() < 1e-12);
    }

    #[test]
    fn unit_step_minimum_at_quarter_turn() {
        let r = OperatorSeq::scalar(&[1.0], 2.0).unwrap();
        let rep = aperiodicity_check_with_arc(&r, 1024, PI / 2.0).unwrap();
        assert!((rep.min_singular_value - 2f64.sqrt()).abs() < 1e-12);
        let a = rep.argmin_angle;
        assert!((a - PI / 2.0).abs() < 1e-12 || (a - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn half_half_is_bounded_away() {
        let r = OperatorSeq::scalar(&[0.5, 0.5], 2.0).unwrap();
        let rep = aperiodicity_check(&r, 1024).unwrap();
        assert!(rep.min_singular_value > 0.4, "{rep:?}");
    }

    #[test]
    fn small_grid_is_rejected() {
        let r = OperatorSeq::scalar(&[1.0], 2.0).unwrap();
        assert!(aperiodicity_check(&r, 4).is_err());
    }
}
