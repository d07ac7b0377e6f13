use std::path::PathBuf;

use clap::Args;
use gbmflow_core::{FirstPassageSetup, ModelParams};

use crate::error::CliResult;

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Drift mu.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    /// Volatility sigma (not sigma^2; a caption's sigma = sqrt(0.01) is --sigma 0.1).
    #[arg(long)]
    pub sigma: f64,
    /// Entry value of every unit.
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Entry rate.
    #[arg(long, default_value_t = 0.0)]
    pub lambda_r: f64,
    /// Exit rate per unit.
    #[arg(long, default_value_t = 0.0)]
    pub lambda_m: f64,
}

impl ModelArgs {
    pub fn build(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::new(self.mu, self.sigma, self.x0, self.lambda_r, self.lambda_m)?)
    }
}

/// A lone searcher and its target; rates are given per command.
#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Target value, above x0.
    #[arg(long)]
    pub x_target: f64,
}

impl SearchArgs {
    pub fn build(&self) -> CliResult<FirstPassageSetup> {
        Ok(FirstPassageSetup::new(ModelParams::new(self.mu, self.sigma, self.x0, 0.0, 0.0)?, self.x_target)?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// CSV destination; the manifest (and summary, if any) are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Add Monte Carlo columns.
    #[arg(long)]
    pub mc: bool,
    /// Independent Monte Carlo runs.
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulation step; defaults to min(0.01, 0.08 / fastest rate).
    #[arg(long)]
    pub dt: Option<f64>,
}

impl McArgs {
    pub fn step(&self, rates: &[f64]) -> f64 {
        self.dt.unwrap_or_else(|| default_step(rates))
    }
}

pub fn default_step(rates: &[f64]) -> f64 {
    let fastest = rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if fastest > 0.0 {
        (0.08 / fastest).min(0.01)
    } else {
        0.01
    }
}
