use super::grid::Grid;
use super::ulam::UlamMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct DensityOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Largest accepted `‖πU - π‖₁` for the final mass vector.
    pub residual_bound: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            tol: 1e-14,
            max_iterations: 20_000,
            residual_bound: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvariantMass {
    /// Cell masses `π_i`, summing to 1.
    pub mass: Vec<f64>,
    /// Density `h_i = π_i / |cell_i|`.
    pub density: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Whether the induced chain on `Y` was used.
    pub induced: bool,
}

/// True when every transition between cells left of `1/2` goes to a later
/// cell, apart from the self-loop of the first cell.
fn complement_is_acyclic(grid: &Grid, u: &UlamMatrix) -> bool {
    (0..grid.y_start).all(|i| u.row(i).all(|(j, _)| j > i || (i == 0 && j == 0)))
}

/// Normalized left fixed vector of the Ulam matrix.
///
/// When the complement of `Y` is acyclic (the LSV ladder) the mass on it is
/// eliminated exactly and the power iteration runs on the induced chain on
/// `Y`, which mixes exponentially fast even though the full chain does not.
pub fn invariant_mass(grid: &Grid, u: &UlamMatrix, opts: DensityOptions) -> Result<InvariantMass> {
    let n = grid.len();
    let induced = complement_is_acyclic(grid, u) && grid.y_start > 0;
    let mut mass: Vec<f64> = (0..n).map(|i| grid.width(i)).collect();
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < opts.max_iterations {
        iterations += 1;
        if induced {
            induced_step(grid, u, &mass, &mut next);
        } else {
            u.push_forward(&mass, &mut next);
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        delta = mass.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mass, &mut next);
        if delta < opts.tol {
            break;
        }
    }
    u.push_forward(&mass, &mut next);
    let residual: f64 = mass.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
    if residual > opts.residual_bound || delta >= opts.tol.max(opts.residual_bound) {
        return Err(Error::NoConvergence {
            iterations,
            residual: residual.max(delta),
        });
    }
    let density = mass.iter().enumerate().map(|(i, m)| m / grid.width(i)).collect();
    Ok(InvariantMass {
        mass,
        density,
        residual,
        iterations,
        induced,
    })
}

/// One step of the induced chain: mass on `Y` is pushed forward, then carried
/// through the complement (in cell order) until it comes back to `Y`.
fn induced_step(grid: &Grid, u: &UlamMatrix, mass: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in grid.y_start..grid.len() {
        let m = mass[i];
        for (j, v) in u.row(i) {
            out[j] += m * v;
        }
    }
    // Y mass produced in this step stays apart from the mass arriving via the
    // complement, so clear it and collect both into `returned`
    let mut returned: Vec<f64> = out[grid.y_start..].to_vec();
    out[grid.y_start..].iter_mut().for_each(|o| *o = 0.0);
    for i in 0..grid.y_start {
        let mut m = out[i];
        if i == 0 {
            let stay = u.row(0).find(|&(j, _)| j == 0).map(|(_, v)| v).unwrap_or(0.0);
            m /= 1.0 - stay;
            out[0] = m;
        }
        for (j, v) in u.row(i) {
            if j == i {
                continue;
            }
            if j >= grid.y_start {
                returned[j - grid.y_start] += m * v;
            } else {
                out[j] += m * v;
            }
        }
    }
    out[grid.y_start..].copy_from_slice(&returned);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsv::{branch_points_for, LeftBranch};

    #[test]
    fn doubling_map_density_is_flat() {
        let branch = LeftBranch::Doubling;
        let xs = branch_points_for(&branch, 30, 1e-14).unwrap();
        let g = Grid::build(&xs, 20, 0.01, 64).unwrap();
        let u = UlamMatrix::build(&g, &branch);
        let inv = invariant_mass(&g, &u, DensityOptions::default()).unwrap();
        assert!(inv.density.iter().all(|h| (h - 1.0).abs() < 1e-6));
    }

    #[test]
    fn lsv_density_is_normalized_fixed_point() {
        let branch = LeftBranch::Lsv { alpha: 0.5 };
        let xs = branch_points_for(&branch, 400, 1e-14).unwrap();
        let g = Grid::build(&xs, 400, 0.01, 200).unwrap();
        let u = UlamMatrix::build(&g, &branch);
        let inv = invariant_mass(&g, &u, DensityOptions::default()).unwrap();
        assert!(inv.induced);
        assert!((inv.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(inv.residual < 1e-8);
        assert!(inv.mass.iter().all(|&m| m >= 0.0));
    }
}
