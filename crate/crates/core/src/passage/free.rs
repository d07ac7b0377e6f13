use std::f64::consts::PI;

use statrs::function::erf::erf;

use super::FirstPassageSetup;
use crate::error::{invalid, Result};
use crate::numerics::{integrate_adaptive, QuadratureSpec};

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-12, max_depth: 60 }
}

/// Hitting-time density of a single immortal searcher.
pub fn fpt_density_free(s: &FirstPassageSetup, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("t must be positive");
    }
    Ok(p0(s, t))
}

pub(crate) fn p0(s: &FirstPassageSetup, t: f64) -> f64 {
    if !(t > 0.0) || t.is_infinite() {
        return 0.0;
    }
    let l = s.distance();
    let s2 = s.params().sigma2();
    let z = l - s.params().mu_bar() * t;
    l / (2.0 * PI * s2 * t * t * t).sqrt() * (-z * z / (2.0 * s2 * t)).exp()
}

/// Location of the maximum of [`fpt_density_free`].
pub fn fpt_mode_free(s: &FirstPassageSetup) -> f64 {
    let l = s.distance();
    let s2 = s.params().sigma2();
    let mb = s.params().mu_bar();
    2.0 * l * l / (3.0 * s2 + (9.0 * s2 * s2 + 4.0 * mb * mb * l * l).sqrt())
}

/// `∫_lo^hi τ^power e^{-lambda_m τ} P0(τ) dτ`, split at multiples of the mode
/// of `P0` so that the sharp rise is resolved.
pub(crate) fn weighted_integral(s: &FirstPassageSetup, lambda_m: f64, power: i32, lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let tm = fpt_mode_free(s);
    let mut cuts = vec![lo];
    let mut marks = vec![tm / 40.0, tm / 8.0, tm / 2.0, tm, 2.0 * tm];
    // geometric cuts through the tail so no panel is wide enough to miss it
    let mut c = 4.0 * tm;
    while c < hi {
        marks.push(c);
        c *= 2.0;
    }
    cuts.extend(marks.into_iter().filter(|&c| c > lo && c < hi));
    cuts.push(hi);
    let f = |tau: f64| tau.powi(power) * (-lambda_m * tau).exp() * p0(s, tau);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_adaptive(f, w[0], w[1], quad_spec())?.value;
    }
    Ok(total)
}

/// Laplace transform of the hitting-time density, `E[e^{-r T0}]`.
pub fn fpt_laplace_free(s: &FirstPassageSetup, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return invalid("r must be nonnegative");
    }
    Ok(laplace(s, r))
}

pub(crate) fn laplace(s: &FirstPassageSetup, r: f64) -> f64 {
    let l = s.distance();
    let s2 = s.params().sigma2();
    let mb = s.params().mu_bar();
    let root = (mb * mb + 2.0 * r * s2).sqrt();
    if mb + root > 0.0 {
        (-2.0 * r * l / (mb + root)).exp()
    } else {
        (l * (mb - root) / s2).exp()
    }
}

/// `E[T0 e^{-r T0}]`, the negative r-derivative of the Laplace transform.
pub(crate) fn laplace_first_moment(s: &FirstPassageSetup, r: f64) -> f64 {
    let mb = s.params().mu_bar();
    let root = (mb * mb + 2.0 * r * s.params().sigma2()).sqrt();
    laplace(s, r) * s.distance() / root
}

/// Probability that a lone immortal searcher has not hit by `t`.
pub fn survival_free(s: &FirstPassageSetup, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid("t must be nonnegative");
    }
    Ok((1.0 - weighted_integral(s, 0.0, 0, 0.0, t)?).clamp(0.0, 1.0))
}

/// [`survival_free`] on a nondecreasing time grid, accumulating one piece per
/// interval.
pub fn survival_free_curve(s: &FirstPassageSetup, ts: &[f64]) -> Result<Vec<f64>> {
    if ts.first().is_some_and(|&t| !(t >= 0.0)) || ts.windows(2).any(|w| !(w[1] >= w[0])) {
        return invalid("time grid must be nonnegative and nondecreasing");
    }
    let mut mass = 0.0;
    let mut prev = 0.0;
    ts.iter()
        .map(|&t| {
            mass += weighted_integral(s, 0.0, 0, prev, t)?;
            prev = t;
            Ok((1.0 - mass).clamp(0.0, 1.0))
        })
        .collect()
}

/// The closed Erf expression exactly as it is commonly printed,
/// `½[erf((μ̄t − L)/√(2σ²t)) − e^{2μ̄L/σ²} erf((μ̄t + L)/√(2σ²t))]`.
///
/// It is *not* a survival probability: it tends to `−½(1 + e^{2μ̄L/σ²})` as
/// `t → 0⁺`. The true survival equals `½(1 − e^{2μ̄L/σ²})` minus this
/// expression. Kept for comparison only.
pub fn survival_free_printed(s: &FirstPassageSetup, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("t must be positive");
    }
    let l = s.distance();
    let s2 = s.params().sigma2();
    let mb = s.params().mu_bar();
    let w = (2.0 * s2 * t).sqrt();
    Ok(0.5 * (erf((mb * t - l) / w) - (2.0 * mb * l / s2).exp() * erf((mb * t + l) / w)))
}
