//! Ensemble quantities of GBM with entries at `x0` and exits at rate `lambda_m`.
//!
//! Every quantity here follows from the renewal decomposition of the
//! unnormalized density: the surviving initial unit contributes
//! `e^{-lambda_m t} f0(x, t)` and each entry at age `u` contributes
//! `lambda_r e^{-lambda_m u} f0(x, u)`. Normalizing by the mean population
//! `phi(t)` gives the per-unit density and its moments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate_adaptive_panels, log_space, QuadratureSpec};
use crate::params::{beta_unchecked, f0_unchecked, DensityCurve, ModelParams};

/// Relative threshold on `|lambda_m - beta(n)|` below which the linear-regime
/// limit is used for moments.
pub const DEGENERATE_REL_THRESHOLD: f64 = 1e-10;

/// Absolute tolerance of the renewal time integral, per grid point.
pub const RENEWAL_ABS_TOL: f64 = 1e-9;

/// `∫_0^t u^m e^{-rate·u} du`, stable for small `rate·t` and for negative rates.
pub(crate) fn exp_moment_integral(m: u32, rate: f64, t: f64) -> f64 {
    let x = rate * t;
    let tm1 = t.powi(m as i32 + 1);
    if x.abs() < 0.5 {
        // t^{m+1} Σ_k (-x)^k / (k! (k+m+1))
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..40 {
            let contrib = term / (k + m + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= -x / (k + 1) as f64;
        }
        return tm1 * sum;
    }
    let e = (-x).exp();
    match m {
        0 => -(-x).exp_m1() / rate,
        1 => (1.0 - e * (1.0 + x)) / (rate * rate),
        2 => (2.0 - e * (2.0 + x * (x + 2.0))) / (rate * rate * rate),
        _ => {
            // integration by parts: I_m = (m I_{m-1} - t^m e^{-x}) / rate
            let mut i = -(-x).exp_m1() / rate;
            for j in 1..=m {
                i = (j as f64 * i - t.powi(j as i32) * e) / rate;
            }
            i
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return invalid("t must be finite and nonnegative");
    }
    Ok(())
}

/// Mean population size at time `t`, starting from one unit.
pub fn phi(p: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(phi_unchecked(p, t))
}

pub(crate) fn phi_unchecked(p: &ModelParams, t: f64) -> f64 {
    (-p.lambda_m() * t).exp() + p.lambda_r() * exp_moment_integral(0, p.lambda_m(), t)
}

/// `∫_0^t e^{-lambda_m u} f0(x, u) du` via the substitution `u = s^2`, which
/// removes the `u^{-1/2}` behaviour at `x = x0`.
fn renewal_integral(p: &ModelParams, x: f64, t: f64, spec: QuadratureSpec) -> Result<f64> {
    let ell = (x / p.x0()).ln();
    let s2 = p.sigma2();
    let mu_bar = p.mu_bar();
    let lm = p.lambda_m();
    let pref = 2.0 / (x * (2.0 * PI * s2).sqrt());
    let integrand = |s: f64| {
        if s <= 0.0 {
            return if ell == 0.0 { pref } else { 0.0 };
        }
        let u = s * s;
        let z = ell - mu_bar * u;
        pref * (-lm * u - z * z / (2.0 * s2 * u)).exp()
    };
    let panels = (ell.abs() / p.sigma()).ceil().clamp(1.0, 200.0) as usize;
    Ok(integrate_adaptive_panels(integrand, 0.0, t.sqrt(), panels, spec)?.value)
}

/// Per-unit density `f_N(x, t)` on the grid `xs`.
pub fn density_finite_time(p: &ModelParams, t: f64, xs: &[f64]) -> Result<DensityCurve> {
    density_finite_time_with(p, t, xs, QuadratureSpec::new(RENEWAL_ABS_TOL, 1e-12, 60)?)
}

/// [`density_finite_time`] with explicit tolerances for the renewal integral;
/// far tails need a relative tolerance since the absolute default is above
/// the density itself there.
pub fn density_finite_time_with(p: &ModelParams, t: f64, xs: &[f64], spec: QuadratureSpec) -> Result<DensityCurve> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid("t must be positive");
    }
    if xs.iter().any(|&x| !(x > 0.0)) {
        return invalid("density grid must be positive");
    }
    let norm = phi_unchecked(p, t);
    let decay = (-p.lambda_m() * t).exp();
    let values = xs
        .par_iter()
        .map(|&x| {
            let renewal = if p.lambda_r() > 0.0 {
                renewal_integral(p, x, t, spec).map_err(|e| Error::QuadratureAt { x, source: Box::new(e) })?
            } else {
                0.0
            };
            Ok((decay * f0_unchecked(p, x, t) + p.lambda_r() * renewal) / norm)
        })
        .collect::<Result<Vec<f64>>>()?;
    DensityCurve::new(xs.to_vec(), values)
}

/// Tail exponents and prefactor of the stationary double power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryDensityParams {
    pub params: ModelParams,
    /// Power of `x/x0` for `x > x0` (nonpositive).
    pub exponent_above: f64,
    /// Power of `x0/x` for `x < x0`.
    pub exponent_below: f64,
    /// `lambda_m / sqrt(mu_bar^2 + 2 sigma^2 lambda_m)`; the density is this over `x`
    /// times the power law.
    pub prefactor: f64,
}

impl StationaryDensityParams {
    pub fn new(p: &ModelParams) -> Result<Self> {
        if p.lambda_m() <= 0.0 {
            return Err(Error::NoStationaryState);
        }
        let s2 = p.sigma2();
        let disc = (p.mu_bar().powi(2) + 2.0 * s2 * p.lambda_m()).sqrt();
        Ok(Self {
            params: *p,
            exponent_above: -(disc - p.mu_bar()) / s2,
            exponent_below: -(disc + p.mu_bar()) / s2,
            prefactor: p.lambda_m() / disc,
        })
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let x0 = self.params.x0();
        let shape = if x > x0 {
            (x / x0).powf(self.exponent_above)
        } else if x < x0 {
            (x0 / x).powf(self.exponent_below)
        } else {
            1.0
        };
        self.prefactor / x * shape
    }

    /// Overall power of `x` in the upper tail, `-1 + exponent_above`.
    pub fn upper_tail_power(&self) -> f64 {
        -1.0 + self.exponent_above
    }

    /// Overall power of `x` in the lower tail, `-1 - exponent_below`.
    pub fn lower_tail_power(&self) -> f64 {
        -1.0 - self.exponent_below
    }
}

/// Stationary per-unit density on `xs`.
pub fn stationary_density(p: &ModelParams, xs: &[f64]) -> Result<DensityCurve> {
    let sd = StationaryDensityParams::new(p)?;
    if xs.iter().any(|&x| !(x > 0.0)) {
        return invalid("density grid must be positive");
    }
    DensityCurve::new(xs.to_vec(), xs.iter().map(|&x| sd.value_at(x)).collect())
}

/// 400 log-spaced points on `[x0/1e3, x0·1e3]`, dropping points where the
/// stationary density is below `1e-30`.
pub fn default_stationary_grid(p: &ModelParams) -> Result<Vec<f64>> {
    let sd = StationaryDensityParams::new(p)?;
    Ok(log_space(p.x0() / 1e3, p.x0() * 1e3, 400).into_iter().filter(|&x| sd.value_at(x) >= 1e-30).collect())
}

/// `<x^n(t)>` per unit, valid at all times.
pub fn moment(p: &ModelParams, n: u32, t: f64) -> Result<f64> {
    if n == 0 {
        return invalid("moment order n must be at least 1");
    }
    check_time(t)?;
    let b = beta_unchecked(p, n);
    let k = p.lambda_m() - b;
    let scale = p.x0().powi(n as i32);
    let norm = phi_unchecked(p, t);
    if k.abs() < DEGENERATE_REL_THRESHOLD * p.lambda_m().abs().max(b.abs()) {
        return Ok(scale * (1.0 + p.lambda_r() * t) / norm);
    }
    Ok(scale * ((-k * t).exp() + p.lambda_r() * exp_moment_integral(0, k, t)) / norm)
}

/// Long-time behaviour of a moment that does not converge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Divergence {
    /// `lambda_m = beta(n)`: grows linearly in time.
    Linear,
    /// `lambda_m < beta(n)`: grows like `exp(rate·t)`.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StationaryMoment {
    Finite(f64),
    Diverges(Divergence),
}

impl StationaryMoment {
    pub fn value(&self) -> Option<f64> {
        match self {
            StationaryMoment::Finite(v) => Some(*v),
            StationaryMoment::Diverges(_) => None,
        }
    }
}

/// Stationary `n`-th moment, or the regime in which it diverges.
pub fn stationary_moment(p: &ModelParams, n: u32) -> Result<StationaryMoment> {
    if n == 0 {
        return invalid("moment order n must be at least 1");
    }
    if p.lambda_m() <= 0.0 {
        return Err(Error::NoStationaryState);
    }
    let b = beta_unchecked(p, n);
    let k = p.lambda_m() - b;
    Ok(if k.abs() < DEGENERATE_REL_THRESHOLD * p.lambda_m().max(b.abs()) {
        StationaryMoment::Diverges(Divergence::Linear)
    } else if k > 0.0 {
        StationaryMoment::Finite(p.x0().powi(n as i32) * p.lambda_m() / k)
    } else {
        StationaryMoment::Diverges(Divergence::Exponential { rate: -k })
    })
}

/// Mean-squared displacement `<(x - x0)^2>`.
pub fn msd(p: &ModelParams, t: f64) -> Result<f64> {
    let x0 = p.x0();
    Ok(moment(p, 2, t)? - 2.0 * x0 * moment(p, 1, t)? + x0 * x0)
}

/// Order of a log-moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogOrder {
    First,
    Second,
}

/// `<log x(t)>` or `<log^2 x(t)>` per unit.
pub fn log_moment(p: &ModelParams, order: LogOrder, t: f64) -> Result<f64> {
    check_time(t)?;
    let l0 = p.x0().ln();
    let mb = p.mu_bar();
    let lm = p.lambda_m();
    let decay = (-lm * t).exp();
    let e0 = exp_moment_integral(0, lm, t);
    let e1 = exp_moment_integral(1, lm, t);
    let num = match order {
        LogOrder::First => decay * (l0 + mb * t) + p.lambda_r() * (l0 * e0 + mb * e1),
        LogOrder::Second => {
            let lin = 2.0 * mb * l0 + p.sigma2();
            let e2 = exp_moment_integral(2, lm, t);
            decay * (l0 * l0 + lin * t + mb * mb * t * t) + p.lambda_r() * (l0 * l0 * e0 + lin * e1 + mb * mb * e2)
        }
    };
    Ok(num / phi_unchecked(p, t))
}

/// `<(log x - log x0)^2>`.
pub fn log_msd(p: &ModelParams, t: f64) -> Result<f64> {
    let l0 = p.x0().ln();
    Ok(log_moment(p, LogOrder::Second, t)? - 2.0 * l0 * log_moment(p, LogOrder::First, t)? + l0 * l0)
}

/// Stationary log-mean `log x0 + mu_bar/lambda_m`.
pub fn stationary_log_mean(p: &ModelParams) -> Result<f64> {
    if p.lambda_m() <= 0.0 {
        return Err(Error::NoStationaryState);
    }
    Ok(p.x0().ln() + p.mu_bar() / p.lambda_m())
}

/// Stationary log-MSD `sigma^2/lambda_m + 2 mu_bar^2/lambda_m^2`.
pub fn stationary_log_msd(p: &ModelParams) -> Result<f64> {
    let lm = p.lambda_m();
    if lm <= 0.0 {
        return Err(Error::NoStationaryState);
    }
    Ok(p.sigma2() / lm + 2.0 * p.mu_bar().powi(2) / (lm * lm))
}

/// Constants of the large-deviation rate function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdfParams {
    /// `lambda_m + mu_bar^2 / (2 sigma^2)`.
    pub a: f64,
    /// Core-boundary velocity `sqrt(2 sigma^2 a)`.
    pub y_star: f64,
}

impl LdfParams {
    pub fn new(p: &ModelParams) -> Self {
        let a = p.lambda_m() + p.mu_bar().powi(2) / (2.0 * p.sigma2());
        Self { a, y_star: (2.0 * p.sigma2() * a).sqrt() }
    }
}

/// Rate function `I(y)` for `y = log(x/x0)/t`: linear in `|y|` inside the
/// core `|y| < y*`, quadratic outside.
pub fn ldf(p: &ModelParams, y: f64) -> f64 {
    let LdfParams { a, y_star } = LdfParams::new(p);
    let s2 = p.sigma2();
    if y.abs() < y_star {
        (2.0 * a / s2).sqrt() * y.abs()
    } else {
        a + y * y / (2.0 * s2)
    }
}

/// Inner-core region `(x0 e^{-y* t}, x0 e^{y* t})` where the stationary state
/// has been established.
pub fn core_boundary(p: &ModelParams, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    let ys = LdfParams::new(p).y_star;
    Ok((p.x0() * (-ys * t).exp(), p.x0() * (ys * t).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_adaptive, trapezoid};

    fn fig2a() -> ModelParams {
        ModelParams::new(0.1, 0.02f64.sqrt(), 2.0, 100.0, 0.5).unwrap()
    }

    fn fig_ss_blue() -> ModelParams {
        ModelParams::new(0.02, 0.1, 10.0, 100.0, 0.1).unwrap()
    }

    #[test]
    fn exp_moment_integral_matches_quadrature() {
        for m in 0..4u32 {
            for (rate, t) in [(0.5, 2.0), (1e-6, 3.0), (-0.3, 4.0), (0.0, 2.0), (3.0, 10.0), (0.2, 2.4)] {
                let q = integrate_adaptive(|u: f64| u.powi(m as i32) * (-rate * u).exp(), 0.0, t, QuadratureSpec::default()).unwrap().value;
                let v = exp_moment_integral(m, rate, t);
                assert!((v / q - 1.0).abs() < 1e-12, "m={m} rate={rate} t={t}: {v} vs {q}");
            }
        }
    }

    #[test]
    fn phi_values() {
        let p = fig2a();
        assert_eq!(phi(&p, 0.0).unwrap(), 1.0);
        let expected = 200.0 - 199.0 * (-1f64).exp();
        assert!((phi(&p, 2.0).unwrap() - expected).abs() < 1e-10);
        assert!((expected - 126.79).abs() < 0.01);
        let balanced = p.with_rates(0.7, 0.7).unwrap();
        for t in [0.0, 0.3, 5.0, 100.0] {
            assert!((phi(&balanced, t).unwrap() - 1.0).abs() < 1e-13);
        }
        let q = p.with_rates(100.0, 0.1).unwrap();
        assert!((phi(&q, 1e4).unwrap() - 1000.0).abs() < 1e-9);
        let closed = p.with_rates(3.0, 0.0).unwrap();
        assert!((phi(&closed, 2.0).unwrap() - 7.0).abs() < 1e-13);
    }

    #[test]
    fn closed_system_density_is_lognormal() {
        let p = fig2a().with_rates(0.0, 0.0).unwrap();
        let xs = log_space(0.5, 8.0, 50);
        let d = density_finite_time(&p, 3.0, &xs).unwrap();
        for (x, v) in xs.iter().zip(d.values()) {
            assert_eq!(*v, f0_unchecked(&p, *x, 3.0));
        }
    }

    fn dense_grid(p: &ModelParams, decades: f64, n: usize) -> Vec<f64> {
        // log grid that contains x0 exactly so the cusp is a node
        let mut xs = log_space(p.x0() * 10f64.powf(-decades), p.x0(), n);
        xs.extend(log_space(p.x0(), p.x0() * 10f64.powf(decades), n).into_iter().skip(1));
        xs
    }

    #[test]
    fn finite_time_density_normalizes() {
        let p = fig2a();
        let xs = dense_grid(&p, 3.0, 3000);
        let d = density_finite_time(&p, 5.0, &xs).unwrap();
        let total = trapezoid(d.xs(), d.values());
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn finite_time_density_relaxes_to_stationary_at_x0() {
        let p = ModelParams::new(0.1, 0.02f64.sqrt(), 2.0, 100.0, 0.5).unwrap();
        let d = density_finite_time(&p, 50.0, &[2.0]).unwrap();
        let st = StationaryDensityParams::new(&p).unwrap().value_at(2.0);
        assert!((d.values()[0] / st - 1.0).abs() < 1e-6, "{} vs {}", d.values()[0], st);
    }

    #[test]
    fn stationary_values_and_exponents() {
        let p = ModelParams::new(0.02, 0.1, 10.0, 100.0, 0.1).unwrap();
        let sd = StationaryDensityParams::new(&p).unwrap();
        // 0.1 / (10 sqrt(0.002225)), frozen from a 30-digit evaluation
        assert!((sd.value_at(10.0) - 0.211_999_576_001_272).abs() < 1e-12);
        assert!((sd.upper_tail_power() - (-4.216_990_566_028_302)).abs() < 1e-12);
        assert!(stationary_density(&p.with_rates(1.0, 0.0).unwrap(), &[1.0]).is_err());
    }

    #[test]
    fn stationary_density_is_laplace_transform_of_f0() {
        for p in [fig_ss_blue(), fig2a(), ModelParams::new(-0.05, 0.3, 1.0, 1.0, 0.2).unwrap()] {
            let sd = StationaryDensityParams::new(&p).unwrap();
            for x in [p.x0() / 7.0, p.x0() / 1.3, p.x0(), p.x0() * 1.2, p.x0() * 5.0] {
                // independent route: λ_m ∫_0^∞ e^{-λ_m t} f0(x,t) dt on the raw time axis,
                // split at t=1 so the t^{-1/2} end point sits in its own adaptive pass
                let spec = QuadratureSpec::new(1e-14, 1e-12, 80).unwrap();
                let g = |t: f64| if t <= 0.0 { 0.0 } else { (-p.lambda_m() * t).exp() * f0_unchecked(&p, x, t) };
                let head = integrate_adaptive(g, 0.0, 1.0, spec).unwrap().value;
                let cut = 60.0 / p.lambda_m();
                let body = integrate_adaptive(g, 1.0, cut, spec).unwrap().value;
                let lap = p.lambda_m() * (head + body);
                assert!((lap / sd.value_at(x) - 1.0).abs() < 1e-6, "x={x}: {lap} vs {}", sd.value_at(x));
            }
        }
    }

    #[test]
    fn stationary_density_normalizes() {
        let p = fig_ss_blue();
        let sd = StationaryDensityParams::new(&p).unwrap();
        let spec = QuadratureSpec::new(1e-13, 1e-12, 60).unwrap();
        let f = |u: f64| u.exp() * sd.value_at(u.exp());
        let l0 = p.x0().ln();
        let total = integrate_adaptive(f, l0 - 40.0, l0, spec).unwrap().value + integrate_adaptive(f, l0, l0 + 40.0, spec).unwrap().value;
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn resetting_special_case() {
        // λ_r = λ_m = r: compare to the resetting form with exponent ∓sqrt(D)/σ² + μ/σ² − 3/2
        let p = ModelParams::new(0.05, 0.05f64.sqrt(), 3.0, 0.4, 0.4).unwrap();
        let sd = StationaryDensityParams::new(&p).unwrap();
        let s2 = p.sigma2();
        let d = (p.mu_bar().powi(2) + 2.0 * s2 * 0.4).sqrt();
        for x in [0.5, 2.0, 3.0, 4.0, 30.0] {
            let sign = if x > 3.0 { -1.0 } else { 1.0 };
            let expo = sign * d / s2 + p.mu() / s2 - 1.5;
            let reset = 0.4 / (3.0 * d) * (x / 3.0f64).powf(expo);
            assert!((sd.value_at(x) / reset - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grid_is_clipped() {
        let g = default_stationary_grid(&fig_ss_blue()).unwrap();
        assert!(g.len() <= 400 && g.len() > 100);
        assert!((g[0] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn moments_initial_and_saturation() {
        let p = fig2a();
        for n in 1..=3 {
            assert!((moment(&p, n, 0.0).unwrap() - 2f64.powi(n as i32)).abs() < 1e-12);
        }
        assert!((moment(&p, 1, 400.0).unwrap() - 2.5).abs() < 1e-9);
        assert_eq!(stationary_moment(&p, 1).unwrap(), StationaryMoment::Finite(2.0 * 0.5 / (0.5 - 0.1)));
        let m2 = stationary_moment(&p, 2).unwrap().value().unwrap();
        assert!((m2 - 4.0 * 0.5 / 0.28).abs() < 1e-12);
        assert!((msd(&p, 400.0).unwrap() - 4.0 * (0.5 / 0.28 - 0.6 / 0.4)).abs() < 1e-8);
        assert_eq!(msd(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn moment_matches_renewal_quadrature() {
        // independent route: numerator = e^{-λm t} x0^n e^{βt} + λr ∫_0^t e^{-λm u} x0^n e^{βu} du
        let p = ModelParams::new(0.08, 0.25, 1.7, 3.0, 0.4).unwrap();
        for n in 1..=3u32 {
            let b = beta_unchecked(&p, n);
            for t in [0.1, 1.0, 7.5] {
                let integral =
                    integrate_adaptive(|u: f64| (-(p.lambda_m() - b) * u).exp(), 0.0, t, QuadratureSpec::default()).unwrap().value;
                let num = p.x0().powi(n as i32) * ((-(p.lambda_m() - b) * t).exp() + p.lambda_r() * integral);
                let expected = num / phi(&p, t).unwrap();
                assert!((moment(&p, n, t).unwrap() / expected - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergent_regimes() {
        let p = fig2a().with_rates(100.0, 0.05).unwrap();
        match stationary_moment(&p, 1).unwrap() {
            StationaryMoment::Diverges(Divergence::Exponential { rate }) => assert!((rate - 0.05).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let q = fig2a().with_rates(100.0, 0.1).unwrap();
        assert_eq!(stationary_moment(&q, 1).unwrap(), StationaryMoment::Diverges(Divergence::Linear));
    }

    #[test]
    fn linear_regime_slope() {
        let p = fig2a().with_rates(100.0, 0.1).unwrap();
        let slope = (moment(&p, 1, 201.0).unwrap() - moment(&p, 1, 200.0).unwrap()) / 1.0;
        assert!((slope / (2.0 * 0.1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn moment_continuous_across_degenerate_branch() {
        let base = fig2a();
        for n in 1..=2u32 {
            let b = beta_unchecked(&base, n);
            let on = base.with_rates(100.0, b).unwrap();
            for t in [0.5, 10.0, 60.0] {
                let limit = moment(&on, n, t).unwrap();
                for dl in [-1e-8, 1e-8] {
                    let near = moment(&base.with_rates(100.0, b + dl).unwrap(), n, t).unwrap();
                    assert!((near / limit - 1.0).abs() < 1e-6, "n={n} t={t} dl={dl}");
                }
            }
        }
    }

    #[test]
    fn short_time_msd_slope() {
        for p in [fig2a(), ModelParams::new(0.3, 0.5, 1.0, 0.5, 0.5).unwrap()] {
            let t = 1e-6;
            let slope = msd(&p, t).unwrap() / t;
            let expected = p.x0().powi(2) * p.sigma2();
            assert!((slope / expected - 1.0).abs() < 0.02, "{slope} vs {expected}");
        }
        let p = ModelParams::new(0.1, 0.2, 1.0, 0.5, 0.5).unwrap();
        for t in [1e-5, 1e-4, 1e-3 / p.sigma2()] {
            let slope = msd(&p, t).unwrap() / t;
            assert!((slope / (p.sigma2()) - 1.0).abs() < 0.02, "t={t}: {slope}");
        }
    }

    #[test]
    fn log_moment_asymptotes() {
        let p = fig2a();
        assert!((log_moment(&p, LogOrder::First, 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((log_moment(&p, LogOrder::Second, 0.0).unwrap() - 2f64.ln().powi(2)).abs() < 1e-15);
        assert_eq!(log_msd(&p, 0.0).unwrap(), 0.0);
        let t = 200.0;
        assert!((log_moment(&p, LogOrder::First, t).unwrap() - (2f64.ln() + 0.18)).abs() < 1e-12);
        let var = log_moment(&p, LogOrder::Second, t).unwrap() - log_moment(&p, LogOrder::First, t).unwrap().powi(2);
        assert!((var - 0.0724).abs() < 1e-12);
        assert!((log_msd(&p, t).unwrap() - 0.1048).abs() < 1e-12);
        assert!((stationary_log_msd(&p).unwrap() - 0.1048).abs() < 1e-15);
    }

    #[test]
    fn log_moments_match_renewal_quadrature() {
        let p = ModelParams::new(0.1, 0.3, 2.5, 4.0, 0.3).unwrap();
        let l0 = p.x0().ln();
        let mb = p.mu_bar();
        for t in [1e-4, 0.5, 3.0, 20.0] {
            let h1 = |u: f64| l0 + mb * u;
            let h2 = |u: f64| (l0 + mb * u).powi(2) + p.sigma2() * u;
            let i1 = integrate_adaptive(|u: f64| (-p.lambda_m() * u).exp() * h1(u), 0.0, t, QuadratureSpec::default()).unwrap().value;
            let i2 = integrate_adaptive(|u: f64| (-p.lambda_m() * u).exp() * h2(u), 0.0, t, QuadratureSpec::default()).unwrap().value;
            let decay = (-p.lambda_m() * t).exp();
            let ph = phi(&p, t).unwrap();
            let e1 = (decay * h1(t) + p.lambda_r() * i1) / ph;
            let e2 = (decay * h2(t) + p.lambda_r() * i2) / ph;
            assert!((log_moment(&p, LogOrder::First, t).unwrap() - e1).abs() < 1e-12);
            assert!((log_moment(&p, LogOrder::Second, t).unwrap() - e2).abs() < 1e-12);
        }
        // λ_m = 0 limit is finite and continuous
        let z = p.with_rates(4.0, 0.0).unwrap();
        let near = p.with_rates(4.0, 1e-9).unwrap();
        assert!((log_msd(&z, 3.0).unwrap() - log_msd(&near, 3.0).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn ldf_shape() {
        let p = fig2a();
        let LdfParams { a, y_star } = LdfParams::new(&p);
        assert!((a - 0.7025).abs() < 1e-15);
        assert!((y_star - 0.167_630_546_142_402).abs() < 1e-14);
        assert_eq!(ldf(&p, 0.0), 0.0);
        let eps = 1e-12;
        assert!((ldf(&p, y_star - eps) - 2.0 * a).abs() < 1e-9);
        assert!((ldf(&p, y_star + eps) - 2.0 * a).abs() < 1e-9);
        assert_eq!(ldf(&p, -0.3), ldf(&p, 0.3));
    }

    #[test]
    fn core_boundary_widens() {
        let p = fig2a();
        assert_eq!(core_boundary(&p, 0.0).unwrap(), (2.0, 2.0));
        let (lo, hi) = core_boundary(&p, 10.0).unwrap();
        assert!((lo - 2.0 * (-1.676_305_461_424_021f64).exp()).abs() < 1e-12);
        assert!((hi - 2.0 * 1.676_305_461_424_021f64.exp()).abs() < 1e-12);
        let (lo2, hi2) = core_boundary(&p, 11.0).unwrap();
        assert!(lo2 < lo && hi2 > hi);
    }
}
