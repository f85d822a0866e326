//! Named experiments: configuration, runners for each module, the catalog of
//! acceptance experiments and CSV/JSON reporting.

mod catalog;
mod config;
mod report;
mod runners;

pub use catalog::{catalog, find, run_catalog, CatalogEntry};
pub use config::{
    ConvParams, ExperimentConfig, LsvParams, Module, RenewalParams, RunSection, TowerParams,
};
pub use report::{config_hash, Check, Outcome, Table};
pub use runners::{run_config, run_conv, run_lsv, run_renewal, run_tower};
