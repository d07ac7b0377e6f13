//! Geometric Brownian motion with independent entry and exit rates.
//!
//! Units enter at a fixed value `x0` with rate `lambda_r`, evolve as GBM and
//! leave with rate `lambda_m`. This crate provides the ensemble density,
//! moments and large-deviation structure of that process, first-passage
//! statistics of the open searcher population, and Monte Carlo simulators
//! used to validate both.

pub mod ensemble;
pub mod error;
pub mod mc;
pub mod numerics;
pub mod params;
pub mod passage;

pub use ensemble::{
    core_boundary, default_stationary_grid, density_finite_time, density_finite_time_with, ldf, log_moment, log_msd, moment, msd, phi,
    stationary_density, stationary_log_mean, stationary_log_msd, stationary_moment, Divergence, LdfParams, LogOrder,
    StationaryDensityParams, StationaryMoment,
};
pub use error::{Error, Result};
pub use mc::{Estimate, FptSample, RngSpec};
pub use params::{beta, f0, gbm_moment_free, validate_params, DensityCurve, GridSpec, ModelParams, ParamSet, TimeSeries};
pub use passage::{FirstPassageSetup, MfptScanResult};
