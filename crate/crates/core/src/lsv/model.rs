use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{invariant_mass, DensityOptions};
use super::grid::Grid;
use super::map::{apply_map, branch_points_for, LeftBranch};
use super::ulam::UlamMatrix;
use crate::error::{Error, Result};
use crate::seq::{DecaySeq, PowerTail};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsvConfig {
    pub alpha: f64,
    /// Number `K` of ladder intervals resolved by the grid; `[0, x_K]` is one cell.
    pub ladder_levels: usize,
    /// Largest cell width on `[x_K, 1/2]`.
    pub max_width: f64,
    /// Number of equal cells on `(1/2, 1]`.
    pub y_cells: usize,
    /// Branch points computed for the return-time tail (at least `ladder_levels`).
    pub tail_points: usize,
}

impl LsvConfig {
    pub fn new(alpha: f64) -> Self {
        LsvConfig {
            alpha,
            ladder_levels: 4000,
            max_width: 0.005,
            y_cells: 2000,
            tail_points: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if self.ladder_levels == 0 || self.y_cells < 2 || !(self.max_width > 0.0) {
            return Err(Error::InvalidInput(
                "ladder_levels >= 1, y_cells >= 2 and max_width > 0 required".into(),
            ));
        }
        Ok(())
    }
}

/// Ulam discretization of the LSV map (or of the doubling control) with its
/// invariant measure and return-time tail.
#[derive(Clone, Debug)]
pub struct LsvModel {
    pub branch: LeftBranch,
    pub levels: usize,
    /// `x_0 = 1/2, x_1, ...`
    pub branch_points: Vec<f64>,
    pub grid: Grid,
    pub ulam: UlamMatrix,
    /// Invariant cell masses, summing to 1.
    pub mass: Vec<f64>,
    /// Invariant density on each cell.
    pub density: Vec<f64>,
    pub density_residual: f64,
    /// `m[φ > n]` for `n = 0..=tail_points`, with a power-law continuation.
    pub return_tail: DecaySeq,
    cumulative: Vec<f64>,
}

const BRANCH_TOL: f64 = 1e-14;

impl LsvModel {
    pub fn build(config: &LsvConfig) -> Result<Self> {
        config.validate()?;
        Self::build_with_branch(
            LeftBranch::Lsv { alpha: config.alpha },
            config.ladder_levels,
            config.max_width,
            config.y_cells,
            config.tail_points.max(config.ladder_levels + 1),
        )
    }

    /// The doubling map on the same kind of grid, for control experiments.
    pub fn doubling(levels: usize, max_width: f64, y_cells: usize) -> Result<Self> {
        Self::build_with_branch(LeftBranch::Doubling, levels, max_width, y_cells, levels + 1)
    }

    fn build_with_branch(
        branch: LeftBranch,
        levels: usize,
        max_width: f64,
        y_cells: usize,
        tail_points: usize,
    ) -> Result<Self> {
        let branch_points = branch_points_for(&branch, tail_points.max(levels + 1), BRANCH_TOL)?;
        let grid = Grid::build(&branch_points, levels, max_width, y_cells)?;
        let ulam = UlamMatrix::build(&grid, &branch);
        let inv = invariant_mass(&grid, &ulam, DensityOptions::default())?;
        let mut cumulative = Vec::with_capacity(grid.len() + 1);
        cumulative.push(0.0);
        for m in &inv.mass {
            cumulative.push(cumulative.last().unwrap() + m);
        }
        let mut model = LsvModel {
            branch,
            levels,
            branch_points,
            grid,
            ulam,
            mass: inv.mass,
            density: inv.density,
            density_residual: inv.residual,
            return_tail: DecaySeq::measured(Vec::new()),
            cumulative,
        };
        let count = model.branch_points.len();
        let values: Vec<f64> = (0..count).map(|n| model.tail_value(n)).collect();
        let mut tail = DecaySeq::measured(values);
        if let Some(alpha) = branch.alpha() {
            let last = count - 1;
            let gamma = 1.0 / alpha;
            let c = tail.values[last] * (last as f64 + 1.0).powf(gamma);
            tail = tail.with_tail(PowerTail { c, gamma, u: 0.0 });
            tail.gamma = gamma;
        }
        model.return_tail = tail;
        Ok(model)
    }

    pub fn alpha(&self) -> Option<f64> {
        self.branch.alpha()
    }

    /// `μ([0, x])` under the piecewise-constant density.
    pub fn measure_below(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.grid.locate(x);
        let (a, _) = self.grid.cell(i);
        self.cumulative[i] + self.density[i] * (x - a)
    }

    fn tail_value(&self, n: usize) -> f64 {
        let top = if n == 0 {
            1.0
        } else {
            0.5 * (1.0 + self.branch_points[n - 1])
        };
        self.measure_below(top) - self.measure_below(0.5)
    }

    /// `m[φ > n] = μ((1/2, (1 + x_{n-1})/2])`, with `x_{-1} = 1`.
    pub fn return_tail(&self, n: usize) -> Result<f64> {
        if n > self.branch_points.len() {
            return Err(Error::InsufficientBranchPoints {
                needed: n - 1,
                available: self.branch_points.len() - 1,
            });
        }
        Ok(self.tail_value(n))
    }

    /// `Σ_{k>n} m[φ > k]`, using the power-law continuation past the stored tail.
    pub fn return_tail_sum(&self, n: usize) -> f64 {
        crate::seq::tail_sum(&self.return_tail, n)
    }

    /// `h(1/2)` from the first `Y` cell and the doubled cell, extrapolated to
    /// the left end: `h(1/2) ≈ 2 avg_w - avg_{2w}`.
    pub fn density_at_half(&self) -> f64 {
        let i = self.grid.y_start;
        let fine = self.density[i];
        let coarse = (self.mass[i] + self.mass[i + 1]) / (self.grid.width(i) + self.grid.width(i + 1));
        2.0 * fine - coarse
    }

    /// `(1/4) h(1/2) α^{-1/α} (1/α - 1)^{-1}`.
    pub fn leading_constant(&self) -> Result<f64> {
        let alpha = self
            .alpha()
            .ok_or_else(|| Error::InvalidInput("leading constant needs the LSV branch".into()))?;
        Ok(leading_constant_formula(alpha, self.density_at_half()))
    }

    /// Draw a point from the invariant measure: a cell by its mass, then a
    /// uniform position inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.grid.len()];
        let i = self.cumulative[1..].partition_point(|&c| c <= u).min(self.grid.len() - 1);
        let (a, b) = self.grid.cell(i);
        let v: f64 = rng.random();
        a + (b - a) * v
    }

    pub fn apply(&self, x: f64) -> f64 {
        apply_map(&self.branch, x)
    }

    /// `m[φ > n]` for `n = 0..=n_max` by iterating orbits from a deterministic
    /// lattice: `points_per_cell` midpoints in every `Y` cell, each carrying
    /// its share of the cell mass.
    pub fn return_tail_from_orbits(&self, n_max: usize, points_per_cell: usize) -> Vec<f64> {
        let y0 = self.grid.y_start;
        let per_cell: Vec<Vec<f64>> = (y0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                let (a, b) = self.grid.cell(i);
                let weight = self.mass[i] / points_per_cell as f64;
                let mut survive = vec![0.0; n_max + 1];
                for p in 0..points_per_cell {
                    let mut x = a + (b - a) * (p as f64 + 0.5) / points_per_cell as f64;
                    // φ(x) = first k ≥ 1 with T^k x in Y
                    let mut phi = 0usize;
                    loop {
                        x = self.apply(x);
                        phi += 1;
                        if x > 0.5 || phi > n_max {
                            break;
                        }
                    }
                    for s in survive.iter_mut().take(phi.min(n_max + 1)) {
                        *s += weight;
                    }
                }
                survive
            })
            .collect();
        let mut out = vec![0.0; n_max + 1];
        for cell in per_cell {
            for (o, v) in out.iter_mut().zip(cell) {
                *o += v;
            }
        }
        out
    }
}

pub fn leading_constant_formula(alpha: f64, h_half: f64) -> f64 {
    0.25 * h_half * alpha.powf(-1.0 / alpha) / (1.0 / alpha - 1.0)
}
