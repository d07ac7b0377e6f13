//! First passage of GBM searchers to an upper target `x_target > x0`.
//!
//! A lone searcher hits the target at the inverse-Gaussian time of its log.
//! Mortal searchers die at rate `lambda_m`; the open population recruits new
//! searchers at `x0` with rate `lambda_r`. The search ends when any searcher
//! reaches the target.

mod free;
mod kernel;
mod mfpt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::ModelParams;

pub use free::{fpt_density_free, fpt_laplace_free, fpt_mode_free, survival_free, survival_free_curve, survival_free_printed};
pub use kernel::{
    fpt_density_open, fpt_density_open_curve, g_kernel, g_kernel_curve, survival_mortal, survival_open, survival_open_curve, KernelValues,
};
pub use mfpt::{
    critical_alpha, mfpt_open, mfpt_reset, optimal_exit, optimal_reset, speedup_ratio, transcendental_residual, MfptScanResult,
    ResetOptimum, DEFAULT_RATE_BRACKET,
};

/// A searcher model together with its target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageSetup {
    params: ModelParams,
    x_target: f64,
}

impl FirstPassageSetup {
    /// Only upward targets are supported.
    pub fn new(params: ModelParams, x_target: f64) -> Result<Self> {
        if !(x_target > 0.0 && x_target.is_finite()) {
            return invalid("x_target must be positive and finite");
        }
        if x_target <= params.x0() {
            return invalid("x_target must exceed x0");
        }
        Ok(Self { params, x_target })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn x_target(&self) -> f64 {
        self.x_target
    }

    /// Log-distance `log(x_target / x0)`.
    pub fn distance(&self) -> f64 {
        (self.x_target / self.params.x0()).ln()
    }

    /// Probability that a single immortal searcher ever hits:
    /// 1 for `mu_bar >= 0`, `exp(2 mu_bar L / sigma^2)` otherwise.
    pub fn hit_probability(&self) -> f64 {
        let mb = self.params.mu_bar();
        if mb >= 0.0 {
            1.0
        } else {
            (2.0 * mb * self.distance() / self.params.sigma2()).exp()
        }
    }
}
