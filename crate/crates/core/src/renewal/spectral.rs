use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use super::{Matrix, OperatorSeq};
use crate::error::{Error, Result};
use crate::numeric::TwoFloat;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Largest admissible `|λ - 1|` for the eigenvalue taken as 1.
    pub eig_tol: f64,
    /// Any other eigenvalue closer than this to 1 makes the eigenvalue non-simple.
    pub gap_tol: f64,
    /// `|μ|` below this is treated as zero.
    pub mu_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            eig_tol: 1e-8,
            gap_tol: 1e-3,
            mu_tol: 1e-12,
        }
    }
}

/// Eigenprojection `P = v wᵀ` of `R(1)` at the eigenvalue 1 (with `wᵀv = 1`)
/// and `μ = tr(P R'(1) P) / tr(P)`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalue: f64,
    pub right: DVector<f64>,
    pub left: DVector<f64>,
    pub projection: Matrix,
    pub mu: f64,
    /// Largest modulus among the remaining eigenvalues of `R(1)`.
    pub second_modulus: f64,
}

impl SpectralData {
    /// `wᵀ X v` for `X` given column-major in double-double. Since `P X P =
    /// (wᵀ X v) P`, this is the scalar coefficient of a projected operator.
    pub(crate) fn project_accurate(&self, x: &[TwoFloat]) -> TwoFloat {
        let d = self.right.len();
        let mut acc = TwoFloat::ZERO;
        for j in 0..d {
            for i in 0..d {
                let e = x[j * d + i];
                let wv = self.left[i] * self.right[j];
                acc = acc + e.mul_f64(wv);
            }
        }
        acc
    }

    /// `μ` in double-double: `wᵀ R'(1) v`, with the tail sums kept unrounded.
    pub(crate) fn mu_accurate(&self, r: &OperatorSeq) -> TwoFloat {
        // Σ n R_n = Σ_{l>0} R_l + Σ_{l>0} (l-1) R_l
        let a0 = r.tail_mass_accurate(0);
        let s0 = r.second_tail_accurate(0);
        self.project_accurate(&a0) + self.project_accurate(&s0)
    }
}

fn null_vector(m: &Matrix) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    v_t.row(idx).transpose()
}

pub fn spectral_data(r: &OperatorSeq, opts: SpectralOptions) -> Result<SpectralData> {
    let total = r.total();
    let d = r.dim();
    let (eigenvalue, right, left, second_modulus) = if d == 1 {
        let lambda = total[(0, 0)];
        if (lambda - 1.0).abs() > opts.eig_tol {
            return Err(Error::NoUnitEigenvalue {
                nearest: format!("{lambda}"),
                tol: opts.eig_tol,
            });
        }
        (lambda, DVector::from_element(1, 1.0), DVector::from_element(1, 1.0), 0.0)
    } else {
        let eigs = total.complex_eigenvalues();
        let one = Complex::new(1.0, 0.0);
        let (best, lambda) = eigs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - one).norm().total_cmp(&(b.1 - one).norm()))
            .map(|(i, l)| (i, *l))
            .expect("non-empty spectrum");
        if (lambda - one).norm() > opts.eig_tol {
            return Err(Error::NoUnitEigenvalue {
                nearest: format!("{lambda}"),
                tol: opts.eig_tol,
            });
        }
        let mut second = 0.0f64;
        for (i, l) in eigs.iter().enumerate() {
            if i == best {
                continue;
            }
            if (l - one).norm() < opts.gap_tol {
                return Err(Error::NotSimple(format!(
                    "eigenvalues {lambda} and {l} both lie within {} of 1",
                    opts.gap_tol
                )));
            }
            second = second.max(l.norm());
        }
        let shifted = &total - Matrix::identity(d, d) * lambda.re;
        let v = null_vector(&shifted);
        let w = null_vector(&shifted.transpose());
        (lambda.re, v, w, second)
    };
    let pairing = left.dot(&right);
    if pairing.abs() < 1e-8 {
        return Err(Error::NotSimple(
            "left and right eigenvectors are orthogonal (Jordan block)".into(),
        ));
    }
    let left = left / pairing;
    let projection = &right * left.transpose();
    let mut data = SpectralData {
        eigenvalue,
        right,
        left,
        projection,
        mu: 0.0,
        second_modulus,
    };
    let mu = data.mu_accurate(r).value();
    if !(mu.abs() > opts.mu_tol) {
        return Err(Error::MuZero(mu));
    }
    data.mu = mu;
    Ok(data)
}

/// `P_n = P (Σ_{l>n} R_l) P`.
pub fn tail_projection(r: &OperatorSeq, s: &SpectralData, n: usize) -> Matrix {
    let c = s.project_accurate(&r.tail_mass_accurate(n)).value();
    &s.projection * c
}
