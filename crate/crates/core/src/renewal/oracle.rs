//! Brute-force reference values for the renewal recursion.

use super::Matrix;

/// `Σ R_{i_1} ⋯ R_{i_k}` over all compositions `i_1 + ... + i_k = n`, with
/// `terms[i-1] = R_i` and `R_i = 0` past the end. Each composition is
/// enumerated explicitly; parts whose matrix is identically zero are skipped,
/// which prunes the search without changing the sum.
pub fn composition_sum(terms: &[Matrix], dim: usize, n: usize) -> Matrix {
    let support: Vec<usize> = terms
        .iter()
        .enumerate()
        .filter(|(_, m)| m.iter().any(|&v| v != 0.0))
        .map(|(i, _)| i + 1)
        .collect();
    let mut total = Matrix::zeros(dim, dim);
    let prefix = Matrix::identity(dim, dim);
    enumerate(terms, &support, n, &prefix, &mut total);
    total
}

fn enumerate(terms: &[Matrix], support: &[usize], remaining: usize, prefix: &Matrix, total: &mut Matrix) {
    if remaining == 0 {
        *total += prefix;
        return;
    }
    for &part in support {
        if part > remaining {
            break;
        }
        let next = prefix * &terms[part - 1];
        enumerate(terms, support, remaining - part, &next, total);
    }
}

/// Number of compositions of `n` with parts in `support`.
pub fn composition_count(support: &[usize], n: usize) -> u64 {
    let mut count = vec![0u64; n + 1];
    count[0] = 1;
    for m in 1..=n {
        count[m] = support.iter().filter(|&&p| p <= m).map(|&p| count[m - p]).sum();
    }
    count[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_half_half() {
        let terms = vec![Matrix::from_element(1, 1, 0.5), Matrix::from_element(1, 1, 0.5)];
        let got: Vec<f64> = (0..4).map(|n| composition_sum(&terms, 1, n)[(0, 0)]).collect();
        assert_eq!(got, vec![1.0, 0.5, 0.75, 0.625]);
    }

    #[test]
    fn counts() {
        assert_eq!(composition_count(&[1, 2], 10), 89);
        assert_eq!(composition_count(&[1, 2, 3], 4), 7);
    }
}
