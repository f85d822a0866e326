use super::{tail_projection, Matrix, OperatorSeq, SpectralData};
use crate::error::{Error, Result};

fn truncated_product(a: &[Matrix], b: &[Matrix]) -> Vec<Matrix> {
    let len = a.len().min(b.len());
    let d = a.first().map(|m| m.nrows()).unwrap_or(0);
    (0..len)
        .map(|n| {
            let mut acc = Matrix::zeros(d, d);
            for k in 0..=n {
                acc += &a[k] * &b[n - k];
            }
            acc
        })
        .collect()
}

/// Coefficients `0..=horizon` of
/// `P/(μ(1-z)) + Σ_{k=1}^{N-1} μ^{-(k+1)} Q(z)^k / (1-z)`, where
/// `Q(z) = Σ_{m≥1} (1 - z^m) P_m`, computed by truncated power-series
/// arithmetic on matrices.
///
/// The `m = 0` summand of `Q` carries the factor `1 - z^0 = 0` and is dropped.
pub fn series_expansion(
    r: &OperatorSeq,
    s: &SpectralData,
    n_order: usize,
    horizon: usize,
) -> Result<Vec<Matrix>> {
    if n_order == 0 {
        return Err(Error::InvalidInput("series order must be at least 1".into()));
    }
    let p = &s.projection;
    // Q_0 = Σ_{m≥1} P_m = P (R'(1) - R(1)) P, Q_j = -P_j for j ≥ 1
    let mut q = Vec::with_capacity(horizon + 1);
    q.push(p * (r.derivative_at_one() - r.total()) * p);
    for j in 1..=horizon {
        q.push(-tail_projection(r, s, j));
    }
    let mut out: Vec<Matrix> = vec![p / s.mu; horizon + 1];
    let mut power = q.clone();
    for k in 1..n_order {
        if k > 1 {
            power = truncated_product(&power, &q);
        }
        let scale = s.mu.powi(-(k as i32 + 1));
        let mut running = Matrix::zeros(p.nrows(), p.ncols());
        for (n, term) in power.iter().enumerate() {
            running += term;
            out[n] += &running * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{expansion_order, spectral_data, SpectralOptions};

    #[test]
    fn order_one_is_constant() {
        let r = OperatorSeq::scalar(&[0.5, 0.3, 0.2], 2.0).unwrap();
        let s = spectral_data(&r, SpectralOptions::default()).unwrap();
        let c = series_expansion(&r, &s, 1, 10).unwrap();
        assert!(c.iter().all(|m| (m[(0, 0)] - 1.0 / s.mu).abs() < 1e-15));
    }

    #[test]
    fn second_order_adds_tail_sums() {
        // P_1 = 0.5, P_2 = 0.2, P_3 = 0: Σ_{k>n} P_k = 0.7, 0.2, 0, 0
        let r = OperatorSeq::scalar(&[0.5, 0.3, 0.2], 2.0).unwrap();
        let s = spectral_data(&r, SpectralOptions::default()).unwrap();
        let one = series_expansion(&r, &s, 1, 4).unwrap();
        let two = series_expansion(&r, &s, 2, 4).unwrap();
        let tails = [0.7, 0.2, 0.0, 0.0, 0.0];
        for n in 0..=4 {
            let diff = two[n][(0, 0)] - one[n][(0, 0)];
            assert!((diff - tails[n] / (s.mu * s.mu)).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn agrees_with_explicit_orders() {
        let r = OperatorSeq::scalar_power_law(1.3, 200).unwrap();
        let s = spectral_data(&r, SpectralOptions::default()).unwrap();
        for order in 2..=4 {
            let series = series_expansion(&r, &s, order, 300).unwrap();
            let rep = expansion_order(&r, &s, 300, order).unwrap();
            let worst = (0..=300)
                .map(|n| (&series[n] - &rep.predicted[n]).abs().max())
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "order {order}: {worst:e}");
        }
    }
}
