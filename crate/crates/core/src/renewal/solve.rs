use nalgebra::DVector;

use super::{Matrix, OperatorSeq};
use crate::error::{Error, Result};
use crate::numeric::TwoFloat;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Abort with [`Error::Divergent`] once a Frobenius norm exceeds this.
    pub norm_bound: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { norm_bound: 1e12 }
    }
}

/// `T_0..T_N` with each entry held as an unevaluated double-double.
#[derive(Clone, Debug)]
pub struct RenewalSolution {
    dim: usize,
    entries: Vec<TwoFloat>,
}

impl RenewalSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.entries.len() / (self.dim * self.dim) - 1
    }

    /// Column-major entries of `T_n`.
    pub fn entries(&self, n: usize) -> &[TwoFloat] {
        let d2 = self.dim * self.dim;
        &self.entries[n * d2..(n + 1) * d2]
    }

    pub fn matrix(&self, n: usize) -> Matrix {
        Matrix::from_iterator(self.dim, self.dim, self.entries(n).iter().map(|e| e.value()))
    }

    pub fn matrices(&self) -> Vec<Matrix> {
        (0..=self.horizon()).map(|n| self.matrix(n)).collect()
    }
}

/// `T_0 = I`, `T_n = Σ_{k=1}^n R_k T_{n-k}` for `n <= N`, rounded to `f64`.
pub fn renewal_solve(r: &OperatorSeq, n_max: usize) -> Result<Vec<Matrix>> {
    Ok(renewal_solve_accurate(r, n_max, SolveOptions::default())?.matrices())
}

/// Same recursion with products accumulated in double-double.
pub fn renewal_solve_accurate(
    r: &OperatorSeq,
    n_max: usize,
    opts: SolveOptions,
) -> Result<RenewalSolution> {
    let d = r.dim();
    let d2 = d * d;
    let terms: Vec<Matrix> = (1..=n_max).map(|k| r.term(k)).collect();
    let mut entries = vec![TwoFloat::ZERO; (n_max + 1) * d2];
    for i in 0..d {
        entries[i * d + i] = TwoFloat::ONE;
    }
    let mut acc = vec![TwoFloat::ZERO; d2];
    for n in 1..=n_max {
        acc.iter_mut().for_each(|a| *a = TwoFloat::ZERO);
        for k in 1..=n {
            let rk = &terms[k - 1];
            let prev = &entries[(n - k) * d2..(n - k + 1) * d2];
            if d == 1 {
                let c = rk[(0, 0)];
                let t = prev[0];
                acc[0] = acc[0] + TwoFloat::product(c, t.hi);
                acc[0] = acc[0].add_f64(c * t.lo);
                continue;
            }
            for j in 0..d {
                for i in 0..d {
                    let mut s = acc[j * d + i];
                    for m in 0..d {
                        let c = rk[(i, m)];
                        if c == 0.0 {
                            continue;
                        }
                        let t = prev[j * d + m];
                        s = s + TwoFloat::product(c, t.hi);
                        s = s.add_f64(c * t.lo);
                    }
                    acc[j * d + i] = s;
                }
            }
        }
        let norm = acc.iter().map(|a| a.hi * a.hi).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > opts.norm_bound {
            return Err(Error::Divergent { n, norm });
        }
        entries[n * d2..(n + 1) * d2].copy_from_slice(&acc);
    }
    Ok(RenewalSolution { dim: d, entries })
}

/// `y_n = T_n f` through the vector recursion `y_n = Σ R_k y_{n-k}`, `y_0 = f`.
pub fn renewal_apply(
    r: &OperatorSeq,
    f: &DVector<f64>,
    n_max: usize,
    opts: SolveOptions,
) -> Result<Vec<DVector<f64>>> {
    let d = r.dim();
    if f.len() != d {
        return Err(Error::InvalidInput(format!(
            "vector has length {}, operators are {d}x{d}",
            f.len()
        )));
    }
    let terms: Vec<Matrix> = (1..=n_max).map(|k| r.term(k)).collect();
    let mut ys: Vec<Vec<TwoFloat>> = Vec::with_capacity(n_max + 1);
    ys.push(f.iter().map(|&x| TwoFloat::new(x)).collect());
    for n in 1..=n_max {
        let mut acc = vec![TwoFloat::ZERO; d];
        for k in 1..=n {
            let rk = &terms[k - 1];
            let prev = &ys[n - k];
            for (i, a) in acc.iter_mut().enumerate() {
                for (m, t) in prev.iter().enumerate() {
                    let c = rk[(i, m)];
                    *a = (*a + TwoFloat::product(c, t.hi)).add_f64(c * t.lo);
                }
            }
        }
        let norm = acc.iter().map(|a| a.hi * a.hi).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > opts.norm_bound {
            return Err(Error::Divergent { n, norm });
        }
        ys.push(acc);
    }
    Ok(ys
        .into_iter()
        .map(|y| DVector::from_iterator(d, y.into_iter().map(|e| e.value())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_example() {
        let r = OperatorSeq::scalar(&[0.5, 0.5], 2.0).unwrap();
        let t = renewal_solve(&r, 3).unwrap();
        let got: Vec<f64> = t.iter().map(|m| m[(0, 0)]).collect();
        assert_eq!(got, vec![1.0, 0.5, 0.75, 0.625]);
    }

    #[test]
    fn single_step_is_constant() {
        let r = OperatorSeq::scalar(&[1.0], 2.0).unwrap();
        let t = renewal_solve(&r, 5).unwrap();
        assert!(t.iter().all(|m| m[(0, 0)] == 1.0));
    }

    #[test]
    fn matrix_recursion_by_hand() {
        let a = Matrix::from_row_slice(2, 2, &[0.2, 0.3, 0.1, 0.4]);
        let b = Matrix::from_row_slice(2, 2, &[0.1, 0.0, 0.2, 0.1]);
        let r = OperatorSeq::new(vec![a.clone(), b.clone()], 2.0, super::super::TailMode::ExactFinite)
            .unwrap();
        let t = renewal_solve(&r, 3).unwrap();
        let t2 = &a * &a + &b;
        let t3 = &a * &t2 + &b * &a;
        assert!((&t[2] - t2).norm() < 1e-15);
        assert!((&t[3] - t3).norm() < 1e-15);
    }

    #[test]
    fn apply_matches_matrix_solution() {
        let a = Matrix::from_row_slice(2, 2, &[0.2, 0.3, 0.1, 0.4]);
        let b = Matrix::from_row_slice(2, 2, &[0.1, 0.0, 0.2, 0.1]);
        let r = OperatorSeq::new(vec![a, b], 2.0, super::super::TailMode::Asymptotic).unwrap();
        let f = DVector::from_vec(vec![1.0, -2.0]);
        let t = renewal_solve(&r, 20).unwrap();
        let y = renewal_apply(&r, &f, 20, SolveOptions::default()).unwrap();
        for n in 0..=20 {
            assert!((&t[n] * &f - &y[n]).norm() < 1e-13);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let r = OperatorSeq::scalar(&[2.0], 2.0).unwrap();
        let err = renewal_solve(&r, 100).unwrap_err();
        assert!(matches!(err, Error::Divergent { .. }));
    }
}
