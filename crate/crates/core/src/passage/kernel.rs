//! Mortal-searcher survival and the recruitment kernel
//! `g(λm, t) = ∫_0^t e^{-λm τ} (t - τ) P0(τ) dτ`.
//!
//! Everything is expressed through three running integrals of the killed
//! hitting density, `A = ∫e^{-λm τ}P0`, `B = ∫τ e^{-λm τ}P0` and
//! `C = ∫τ² e^{-λm τ}P0`, so `g = tA − B` and `∂g/∂λm = −(tB − C)`.

use serde::{Deserialize, Serialize};

use super::free::{p0, weighted_integral};
use super::FirstPassageSetup;
use crate::error::{invalid, Result};

/// Running integrals at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelValues {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl KernelValues {
    /// Probability that a single mortal searcher is alive and has not hit.
    pub fn q(&self) -> f64 {
        (1.0 - self.a).clamp(0.0, 1.0)
    }

    pub fn g(&self) -> f64 {
        (self.t * self.a - self.b).max(0.0)
    }

    /// `∂g/∂λm`.
    pub fn g_lambda(&self) -> f64 {
        -(self.t * self.b - self.c)
    }

    pub(crate) fn add(&self, t: f64, da: f64, db: f64, dc: f64) -> Self {
        Self { t, a: self.a + da, b: self.b + db, c: self.c + dc }
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return invalid(format!("{name} must be finite and nonnegative"));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return invalid("t must be finite and nonnegative");
    }
    Ok(())
}

fn increment(s: &FirstPassageSetup, lambda_m: f64, from: &KernelValues, t: f64) -> Result<KernelValues> {
    let lo = from.t;
    Ok(from.add(
        t,
        weighted_integral(s, lambda_m, 0, lo, t)?,
        weighted_integral(s, lambda_m, 1, lo, t)?,
        weighted_integral(s, lambda_m, 2, lo, t)?,
    ))
}

pub(crate) fn kernel_at(s: &FirstPassageSetup, lambda_m: f64, t: f64) -> Result<KernelValues> {
    increment(s, lambda_m, &KernelValues::default(), t)
}

/// Running integrals on a nondecreasing grid, one adaptive piece per interval.
pub(crate) fn kernel_curve(s: &FirstPassageSetup, lambda_m: f64, ts: &[f64]) -> Result<Vec<KernelValues>> {
    check_rate("lambda_m", lambda_m)?;
    if ts.first().is_some_and(|&t| !(t >= 0.0)) || ts.windows(2).any(|w| !(w[1] >= w[0])) || ts.iter().any(|t| !t.is_finite()) {
        return invalid("time grid must be finite, nonnegative and nondecreasing");
    }
    let mut cur = KernelValues::default();
    ts.iter()
        .map(|&t| {
            cur = increment(s, lambda_m, &cur, t)?;
            Ok(cur)
        })
        .collect()
}

/// Survival of one searcher that dies at rate `lambda_m`.
pub fn survival_mortal(s: &FirstPassageSetup, lambda_m: f64, t: f64) -> Result<f64> {
    check_rate("lambda_m", lambda_m)?;
    check_time(t)?;
    Ok((1.0 - weighted_integral(s, lambda_m, 0, 0.0, t)?).clamp(0.0, 1.0))
}

/// The recruitment kernel `g(lambda_m, t)`.
pub fn g_kernel(s: &FirstPassageSetup, lambda_m: f64, t: f64) -> Result<f64> {
    check_rate("lambda_m", lambda_m)?;
    check_time(t)?;
    Ok(kernel_at(s, lambda_m, t)?.g())
}

/// Running integrals (and hence `g`, `q`, `∂g/∂λm`) on a nondecreasing grid.
pub fn g_kernel_curve(s: &FirstPassageSetup, lambda_m: f64, ts: &[f64]) -> Result<Vec<KernelValues>> {
    kernel_curve(s, lambda_m, ts)
}

/// Probability that no searcher of the open population has hit by `t`.
pub fn survival_open(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64, t: f64) -> Result<f64> {
    check_rate("lambda_r", lambda_r)?;
    check_rate("lambda_m", lambda_m)?;
    check_time(t)?;
    Ok(open_survival_from(&kernel_at(s, lambda_m, t)?, lambda_r))
}

pub(crate) fn open_survival_from(k: &KernelValues, lambda_r: f64) -> f64 {
    (k.q() * (-lambda_r * k.g()).exp()).clamp(0.0, 1.0)
}

pub(crate) fn open_density_from(s: &FirstPassageSetup, k: &KernelValues, lambda_r: f64, lambda_m: f64) -> f64 {
    let killed = (-lambda_m * k.t).exp() * p0(s, k.t);
    (-lambda_r * k.g()).exp() * (killed + lambda_r * k.a.clamp(0.0, 1.0) * k.q())
}

/// [`survival_open`] on a nondecreasing grid.
pub fn survival_open_curve(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64, ts: &[f64]) -> Result<Vec<f64>> {
    check_rate("lambda_r", lambda_r)?;
    Ok(kernel_curve(s, lambda_m, ts)?.iter().map(|k| open_survival_from(k, lambda_r)).collect())
}

/// Hitting-time density of the open population, `-dQ/dt`.
pub fn fpt_density_open(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64, t: f64) -> Result<f64> {
    check_rate("lambda_r", lambda_r)?;
    check_rate("lambda_m", lambda_m)?;
    if !(t > 0.0 && t.is_finite()) {
        return invalid("t must be positive");
    }
    Ok(open_density_from(s, &kernel_at(s, lambda_m, t)?, lambda_r, lambda_m))
}

/// [`fpt_density_open`] on a nondecreasing grid.
pub fn fpt_density_open_curve(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64, ts: &[f64]) -> Result<Vec<f64>> {
    check_rate("lambda_r", lambda_r)?;
    Ok(kernel_curve(s, lambda_m, ts)?.iter().map(|k| open_density_from(s, k, lambda_r, lambda_m)).collect())
}
