//! Model parameters and the closed-form building blocks of plain GBM.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Unvalidated parameter set, as read from flags or a manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
    pub lambda_r: f64,
    pub lambda_m: f64,
}

/// Drift `mu`, volatility `sigma`, entry value `x0`, entry rate `lambda_r`
/// and exit rate `lambda_m` of the open GBM population.
///
/// Always valid: the only ways to build one go through [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamSet", into = "ParamSet")]
pub struct ModelParams {
    mu: f64,
    sigma: f64,
    x0: f64,
    lambda_r: f64,
    lambda_m: f64,
}

/// Check every field constraint, reporting the first violation.
pub fn validate_params(p: ParamSet) -> Result<ModelParams> {
    let fields = [("mu", p.mu), ("sigma", p.sigma), ("x0", p.x0), ("lambda_r", p.lambda_r), ("lambda_m", p.lambda_m)];
    if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
        return invalid(format!("{name} must be finite"));
    }
    if p.sigma <= 0.0 {
        return invalid("sigma must be positive");
    }
    if p.x0 <= 0.0 {
        return invalid("x0 must be positive");
    }
    if p.lambda_r < 0.0 {
        return invalid("lambda_r must be nonnegative");
    }
    if p.lambda_m < 0.0 {
        return invalid("lambda_m must be nonnegative");
    }
    Ok(ModelParams { mu: p.mu, sigma: p.sigma, x0: p.x0, lambda_r: p.lambda_r, lambda_m: p.lambda_m })
}

impl TryFrom<ParamSet> for ModelParams {
    type Error = crate::Error;
    fn try_from(p: ParamSet) -> Result<Self> {
        validate_params(p)
    }
}

impl From<ModelParams> for ParamSet {
    fn from(p: ModelParams) -> Self {
        ParamSet { mu: p.mu, sigma: p.sigma, x0: p.x0, lambda_r: p.lambda_r, lambda_m: p.lambda_m }
    }
}

impl ModelParams {
    pub fn new(mu: f64, sigma: f64, x0: f64, lambda_r: f64, lambda_m: f64) -> Result<Self> {
        validate_params(ParamSet { mu, sigma, x0, lambda_r, lambda_m })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn lambda_r(&self) -> f64 {
        self.lambda_r
    }
    pub fn lambda_m(&self) -> f64 {
        self.lambda_m
    }

    /// Effective (median) drift `mu - sigma^2 / 2`.
    pub fn mu_bar(&self) -> f64 {
        self.mu - 0.5 * self.sigma2()
    }

    /// Same model with different entry/exit rates.
    pub fn with_rates(&self, lambda_r: f64, lambda_m: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.x0, lambda_r, lambda_m)
    }
}

/// Log-normal density of plain GBM at `x` after time `t`.
pub fn f0(p: &ModelParams, x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) {
        return invalid("x must be positive");
    }
    if !(t > 0.0) {
        return invalid("t must be positive");
    }
    Ok(f0_unchecked(p, x, t))
}

#[inline]
pub(crate) fn f0_unchecked(p: &ModelParams, x: f64, t: f64) -> f64 {
    let var = p.sigma2() * t;
    let z = (x / p.x0).ln() - p.mu_bar() * t;
    (-z * z / (2.0 * var)).exp() / (x * (2.0 * PI * var).sqrt())
}

/// Growth rate of the n-th moment of plain GBM: `n·mu + n(n-1)·sigma^2/2`.
pub fn beta(p: &ModelParams, n: u32) -> Result<f64> {
    if n == 0 {
        return invalid("moment order n must be at least 1");
    }
    Ok(beta_unchecked(p, n))
}

#[inline]
pub(crate) fn beta_unchecked(p: &ModelParams, n: u32) -> f64 {
    let n = n as f64;
    n * p.mu + 0.5 * n * (n - 1.0) * p.sigma2()
}

/// `<x^n(t)>` of plain GBM started at `x0`.
pub fn gbm_moment_free(p: &ModelParams, n: u32, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid("t must be nonnegative");
    }
    Ok(p.x0.powi(n as i32) * (beta(p, n)? * t).exp())
}

/// Positive abscissa grid with densities on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    xs: Vec<f64>,
    values: Vec<f64>,
    std_errors: Option<Vec<f64>>,
}

impl DensityCurve {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return invalid("grid and density values must have equal length");
        }
        if xs.first().is_some_and(|&x| !(x > 0.0)) {
            return invalid("density grid must be positive");
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("density grid must be strictly increasing");
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return invalid("density values must be finite and nonnegative");
        }
        Ok(Self { xs, values, std_errors: None })
    }

    pub fn with_std_errors(mut self, se: Vec<f64>) -> Result<Self> {
        if se.len() != self.xs.len() {
            return invalid("standard errors must match the grid length");
        }
        self.std_errors = Some(se);
        Ok(self)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn std_errors(&self) -> Option<&[f64]> {
        self.std_errors.as_deref()
    }
    pub fn len(&self) -> usize {
        self.xs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        crate::numerics::trapezoid(&self.xs, &self.values)
    }
}

/// Values on a nondecreasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    ts: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(ts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ts.len() != values.len() {
            return invalid("time grid and values must have equal length");
        }
        if ts.first().is_some_and(|&t| !(t >= 0.0)) {
            return invalid("time grid must start at t >= 0");
        }
        if ts.windows(2).any(|w| !(w[1] >= w[0])) {
            return invalid("time grid must be nondecreasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("time series values must be finite");
        }
        Ok(Self { ts, values })
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Abscissa grid description; log spacing is the default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn log(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points, log: true }
    }

    pub fn linear(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points, log: false }
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return invalid("grid requires 0 < lo < hi");
        }
        if self.points < 2 {
            return invalid("grid requires at least 2 points");
        }
        Ok(if self.log {
            crate::numerics::log_space(self.lo, self.hi, self.points)
        } else {
            crate::numerics::lin_space(self.lo, self.hi, self.points)
        })
    }
}
