//! Numerical model of photon pairs from spontaneous four-wave mixing in
//! birefringent fibre, with the spectral purity of the heralded state as the
//! main figure of merit.

pub mod amplitude;
pub mod error;
pub mod fiber;
pub mod filtering;
pub mod grid;
pub mod jsa;
pub mod jta;
pub mod par;
pub mod pump;
pub mod schmidt;
pub mod ssf;
pub mod sweeps;

pub use amplitude::{transform_2d, Axis, JointAmplitude};
pub use error::{Error, Result};
pub use fiber::{FiberParams, FiberPreset};
pub use grid::{dual_grid, Domain, SpectralGrid, TemporalGrid};
pub use par::Execution;
pub use pump::{gaussian_pump, square_pump, PumpEnvelope};
