use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    /// `[0, x_K]`, containing the neutral fixed point.
    Sticky,
    /// Part of `(x_{k+1}, x_k]`.
    Ladder(usize),
    /// Part of `Y = (1/2, 1]`.
    Y,
}

/// Partition of `[0, 1]`: the sticky cell, the ladder intervals between
/// consecutive branch points (split so no cell is wider than `max_width`),
/// then `y_cells` equal cells on `(1/2, 1]`. Cells are `(a, b]` except the
/// first, which is closed.
#[derive(Clone, Debug)]
pub struct Grid {
    pub edges: Vec<f64>,
    pub kinds: Vec<CellKind>,
    pub y_start: usize,
}

impl Grid {
    /// `branch_points[k] = x_k` with `x_0 = 1/2`; levels `0..K` are used.
    pub fn build(branch_points: &[f64], levels: usize, max_width: f64, y_cells: usize) -> Result<Self> {
        if levels == 0 || levels >= branch_points.len() {
            return Err(Error::InsufficientBranchPoints {
                needed: levels,
                available: branch_points.len().saturating_sub(1),
            });
        }
        if !(max_width > 0.0) || y_cells == 0 {
            return Err(Error::InvalidInput("grid needs max_width > 0 and y_cells > 0".into()));
        }
        let mut edges = vec![0.0, branch_points[levels]];
        let mut kinds = vec![CellKind::Sticky];
        for k in (0..levels).rev() {
            let (a, b) = (branch_points[k + 1], branch_points[k]);
            let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
            for p in 1..=pieces {
                let e = if p == pieces {
                    b
                } else {
                    a + (b - a) * p as f64 / pieces as f64
                };
                edges.push(e);
                kinds.push(CellKind::Ladder(k));
            }
        }
        let y_start = kinds.len();
        for i in 1..=y_cells {
            edges.push(0.5 + 0.5 * i as f64 / y_cells as f64);
            kinds.push(CellKind::Y);
        }
        Ok(Grid { edges, kinds, y_start })
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Index of the cell containing `x ∈ [0, 1]`.
    pub fn locate(&self, x: f64) -> usize {
        // first edge >= x among edges[1..]
        let idx = self.edges[1..].partition_point(|&e| e < x);
        idx.min(self.len() - 1)
    }

    pub fn y_cells(&self) -> usize {
        self.len() - self.y_start
    }
}
