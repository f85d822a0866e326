use rayon::prelude::*;

use super::grid::Grid;
use super::map::LeftBranch;

/// Row-stochastic Ulam matrix in compressed-row form:
/// `U_ij = Leb(cell_i ∩ T^{-1} cell_j) / Leb(cell_i)`.
#[derive(Clone, Debug)]
pub struct UlamMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl UlamMatrix {
    pub fn build(grid: &Grid, branch: &LeftBranch) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..grid.len())
            .into_par_iter()
            .map(|i| ulam_row(grid, branch, i))
            .collect();
        let mut row_ptr = Vec::with_capacity(grid.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        UlamMatrix { row_ptr, cols, vals }
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    /// `w = v U`: push a vector of cell masses forward one step.
    pub fn push_forward(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (j, u) in self.row(i) {
                out[j] += vi * u;
            }
        }
    }
}

/// Snap an image point onto a grid edge when it agrees to rounding, so branch
/// points map exactly onto branch points.
fn snap(grid: &Grid, y: f64) -> f64 {
    let y = y.clamp(0.0, 1.0);
    let idx = grid.edges.partition_point(|&e| e < y);
    for cand in [idx.saturating_sub(1), idx.min(grid.edges.len() - 1)] {
        let e = grid.edges[cand];
        if (e - y).abs() <= 1e-13 * e.max(f64::MIN_POSITIVE) {
            return e;
        }
    }
    y
}

fn ulam_row(grid: &Grid, branch: &LeftBranch, i: usize) -> Vec<(usize, f64)> {
    let (a, b) = grid.cell(i);
    let left = b <= 0.5;
    let (forward, inverse): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = if left {
        (Box::new(|x| branch.apply(x)), Box::new(|y| branch.inverse(y)))
    } else {
        (Box::new(|x| 2.0 * x - 1.0), Box::new(|y| 0.5 * (y + 1.0)))
    };
    let lo = snap(grid, forward(a));
    let hi = snap(grid, forward(b));
    // targets j with (edges[j], edges[j+1]] meeting (lo, hi]
    let first = grid.edges[1..].partition_point(|&e| e <= lo).min(grid.len() - 1);
    let last = grid.edges.partition_point(|&e| e < hi).saturating_sub(1).min(grid.len() - 1);
    let width = b - a;
    let mut row = Vec::with_capacity(last + 1 - first);
    let mut prev = a;
    for j in first..=last {
        let next = if j == last { b } else { inverse(grid.edges[j + 1]).clamp(prev, b) };
        let frac = (next - prev) / width;
        if frac > 0.0 {
            row.push((j, frac));
        }
        prev = next;
    }
    row
}
