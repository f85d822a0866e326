use nalgebra::DVector;

use super::solve::{renewal_apply, SolveOptions};
use super::{OperatorSeq, SpectralData};
use crate::error::{Error, Result};
use crate::seq::DecaySeq;

/// Relative bound on `‖Pf‖ / ‖f‖` accepted as `Pf = 0`.
pub const ZERO_PROJECTION_TOL: f64 = 1e-8;

fn fitted(values: Vec<f64>) -> DecaySeq {
    let seq = DecaySeq::measured(values);
    let window = seq.default_window();
    if window.1 > window.0 {
        // sequences that vanish on the window keep no fit
        seq.clone().with_fit(window).unwrap_or(seq)
    } else {
        seq
    }
}

/// `‖T_n f‖` for `n = 0..=N` where `Pf = 0`.
pub fn zero_projection_decay(
    r: &OperatorSeq,
    s: &SpectralData,
    f: &DVector<f64>,
    n_max: usize,
) -> Result<DecaySeq> {
    let pf = &s.projection * f;
    let bound = ZERO_PROJECTION_TOL * f.norm();
    if pf.norm() > bound {
        return Err(Error::ProjectionNotZero {
            norm: pf.norm(),
            bound,
        });
    }
    let ys = renewal_apply(r, f, n_max, SolveOptions::default())?;
    Ok(fitted(ys.iter().map(|y| y.norm()).collect()))
}

/// `‖T_n f - Pf/μ‖` for arbitrary `f`: the distance to the renewal limit.
pub fn centered_decay(
    r: &OperatorSeq,
    s: &SpectralData,
    f: &DVector<f64>,
    n_max: usize,
) -> Result<DecaySeq> {
    let limit = &s.projection * f / s.mu;
    let ys = renewal_apply(r, f, n_max, SolveOptions::default())?;
    Ok(fitted(ys.iter().map(|y| (y - &limit).norm()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{spectral_data, Matrix, SpectralOptions, TailMode};

    fn two_state() -> OperatorSeq {
        let a = Matrix::from_row_slice(2, 2, &[0.3, 0.1, 0.2, 0.2]);
        let b = Matrix::from_row_slice(2, 2, &[0.2, 0.1, 0.1, 0.2]);
        let c = Matrix::from_row_slice(2, 2, &[0.1, 0.2, 0.1, 0.2]);
        OperatorSeq::new(vec![a, b, c], 2.0, TailMode::ExactFinite).unwrap()
    }

    #[test]
    fn zero_vector_gives_zero_sequence() {
        let r = two_state();
        let s = spectral_data(&r, SpectralOptions::default()).unwrap();
        let seq = zero_projection_decay(&r, &s, &DVector::zeros(2), 50).unwrap();
        assert!(seq.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn generic_vector_is_rejected() {
        let r = two_state();
        let s = spectral_data(&r, SpectralOptions::default()).unwrap();
        let err = zero_projection_decay(&r, &s, &DVector::from_vec(vec![1.0, 0.0]), 10).unwrap_err();
        assert!(matches!(err, Error::ProjectionNotZero { .. }));
    }

    #[test]
    fn kernel_vector_decays_fast_for_finite_support() {
        let r = two_state();
        let s = spectral_data(&r, SpectralOptions::default()).unwrap();
        // f = v_perp to w: w^T f = 0
        let f = DVector::from_vec(vec![s.left[1], -s.left[0]]);
        let seq = zero_projection_decay(&r, &s, &f, 60).unwrap();
        assert!(seq.values[60] < 1e-10 * seq.values[0]);
        let centered = centered_decay(&r, &s, &DVector::from_vec(vec![1.0, 0.0]), 60).unwrap();
        assert!(centered.values[60] < 1e-10);
    }
}
