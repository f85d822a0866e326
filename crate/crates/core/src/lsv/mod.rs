//! The Liverani–Saussol–Vaienti map `x(1 + (2x)^α)` / `2x - 1`: branch points,
//! Ulam discretization, invariant density, return-time tail, correlations
//! and the central limit theorem for Birkhoff sums.

mod clt;
mod correlation;
mod density;
mod grid;
mod map;
mod model;
mod observable;
mod ulam;

pub use clt::{
    birkhoff_clt, birkhoff_sums, green_kubo_variance, ks_distance, CltReport, GreenKubo,
    GreenKuboOptions, MEAN_TOL,
};
pub use correlation::{correlation, correlation_monte_carlo, correlations, McEstimate};
pub use density::{invariant_mass, DensityOptions, InvariantMass};
pub use grid::{CellKind, Grid};
pub use map::{apply_map, branch_points, branch_points_for, lsv_apply, LeftBranch};
pub use model::{leading_constant_formula, LsvConfig, LsvModel};
pub use observable::{Observable, ObservableSpec, WeightedTerm};
pub use ulam::UlamMatrix;
