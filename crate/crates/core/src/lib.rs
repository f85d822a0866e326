//! Renewal sequences of finite-dimensional operators and their asymptotic
//! expansions, with two dynamical applications: the Liverani–Saussol–Vaienti
//! intermittent map (discretized by the Ulam method) and Young towers with an
//! i.i.d. base.
//!
//! The modules mirror the computational pieces:
//!
//! * [`seq`] scalar sequences: convolution, tail sums, synthetic power laws and
//!   decay-rate fitting.
//! * [`renewal`] the operator renewal equation `T = I + R·T`, spectral data at
//!   the eigenvalue 1 and the expansions of `T_n` up to fourth order.
//! * [`lsv`] the intermittent map, its Ulam matrix, invariant density,
//!   return-time tail, correlations and the CLT check.
//! * [`tower`] Young towers with a prescribed return-time law.
//! * [`experiment`] named, reproducible experiments behind the CLI.

pub mod error;
pub mod experiment;
pub mod lsv;
pub mod numeric;
pub mod renewal;
pub mod seq;
pub mod special;
pub mod tower;

pub use error::{Error, Result};
