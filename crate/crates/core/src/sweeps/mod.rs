//! Configuration-driven runs: rate sweeps, duration optimisation, filter
//! sweeps and their export.

pub mod config;
pub mod export;
pub mod optimize;
pub mod runner;

pub use config::{Model, PumpShapeKind, PumpSpec, RunConfig, SweepPoint};
pub use optimize::{optimize_all, optimize_time_scale, OptimizeResult};
pub use runner::{filter_sweep, purity_vs_rate, visibility_bound, Prepared, RateRow, RateTable};
