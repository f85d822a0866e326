//! Operator renewal sequences: the recursion `T_n = Σ R_k T_{n-k}`, the
//! spectral data of `R(1)` and asymptotic expansions of `T_n`.

mod aperiodicity;
mod decay;
mod expansion;
mod operator;
pub mod oracle;
mod series;
mod solve;
mod spectral;

pub use aperiodicity::{
    aperiodicity_check, aperiodicity_check_with_arc, AperiodicityReport, DEFAULT_EXCLUDED_ARC,
};
pub use decay::{centered_decay, zero_projection_decay, ZERO_PROJECTION_TOL};
pub use expansion::{
    expansion_first_order, expansion_order, expansion_orders, write_expansion_csv, ErrorClass,
    ExpansionReport,
};
pub use operator::{OperatorSeq, TailMode};
pub use series::series_expansion;
pub use solve::{renewal_apply, renewal_solve, renewal_solve_accurate, RenewalSolution, SolveOptions};
pub use spectral::{spectral_data, tail_projection, SpectralData, SpectralOptions};

use nalgebra::DMatrix;

pub type Matrix = DMatrix<f64>;

/// Spectral (largest singular value) norm.
pub fn op_norm(m: &Matrix) -> f64 {
    match (m.nrows(), m.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, 1) => m[(0, 0)].abs(),
        (_, 1) | (1, _) => m.norm(),
        _ => m
            .singular_values()
            .iter()
            .fold(0.0f64, |acc, &s| acc.max(s)),
    }
}
