//! Mean first-passage times, the optimal exit rate, and the comparison with
//! stochastic resetting.
//!
//! The open-population MFPT is `∫_0^∞ exp(-λr g(λm, t)) dt − 1/λr`. The
//! integral is cut at `Tc` where `λr g(Tc) ≥ 35`; beyond it `g` grows at least
//! with slope `A(Tc)`, which bounds the tail by `exp(-λr g(Tc)) / (λr A(Tc))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::free::{fpt_mode_free, laplace, laplace_first_moment};
use super::kernel::KernelValues;
use super::FirstPassageSetup;
use crate::error::{invalid, Error, Result};
use crate::numerics::{find_root_bracketed, gauss_kronrod15, log_space, minimize_golden, Boundary};
use crate::passage::free::p0;

/// Default search interval for optimal exit and resetting rates.
pub const DEFAULT_RATE_BRACKET: (f64, f64) = (1e-3, 10.0);

const CUT_EXPONENT: f64 = 35.0;
const SCAN_POINTS: usize = 25;
const MAX_SPLIT_DEPTH: u32 = 40;

struct OpenIntegrals {
    /// `∫_0^Tc exp(-λr g) dt` plus the tail bound.
    survival: f64,
    /// `∫_0^Tc exp(-λr g) (g + λm ∂g/∂λm) dt`.
    stationarity: f64,
}

struct PanelSums {
    survival: f64,
    stationarity: f64,
}

struct OpenIntegrator<'a> {
    s: &'a FirstPassageSetup,
    lambda_r: f64,
    lambda_m: f64,
    unit_tol: f64,
}

impl OpenIntegrator<'_> {
    fn weight(&self, tau: f64, power: i32) -> f64 {
        tau.powi(power) * (-self.lambda_m * tau).exp() * p0(self.s, tau)
    }

    /// Increments of `A`, `B`, `C` over `[lo, hi]` with the error of `A`.
    fn increments(&self, lo: f64, hi: f64) -> ([f64; 3], f64) {
        let (da, ea, _) = gauss_kronrod15(&mut |t| self.weight(t, 0), lo, hi);
        let (db, _, _) = gauss_kronrod15(&mut |t| self.weight(t, 1), lo, hi);
        let (dc, _, _) = gauss_kronrod15(&mut |t| self.weight(t, 2), lo, hi);
        ([da, db, dc], ea)
    }

    fn panel(&self, lo: f64, hi: f64, start: KernelValues, depth: u32) -> Result<(PanelSums, KernelValues)> {
        let ([da, db, dc], inner_err) = self.increments(lo, hi);
        let end = start.add(hi, da, db, dc);

        let mut nodes: Vec<KernelValues> = Vec::with_capacity(15);
        let (survival, outer_err, _) = gauss_kronrod15(
            &mut |t| {
                let ([a, b, c], _) = self.increments(lo, t);
                let k = start.add(t, a, b, c);
                nodes.push(k);
                (-self.lambda_r * k.g()).exp()
            },
            lo,
            hi,
        );
        let mut idx = 0;
        let (stationarity, _, _) = gauss_kronrod15(
            &mut |_| {
                let k = nodes[idx];
                idx += 1;
                (-self.lambda_r * k.g()).exp() * (k.g() + self.lambda_m * k.g_lambda())
            },
            lo,
            hi,
        );

        let outer_ok = outer_err <= self.unit_tol * (hi - lo) + 1e-10 * survival.abs();
        let inner_ok = inner_err <= 1e-15 + 1e-11 * da.abs();
        if (outer_ok && inner_ok) || depth >= MAX_SPLIT_DEPTH {
            if !(survival.is_finite() && stationarity.is_finite()) {
                return Err(Error::QuadratureDepth { a: lo, b: hi, error: f64::INFINITY });
            }
            return Ok((PanelSums { survival, stationarity }, end));
        }
        let mid = 0.5 * (lo + hi);
        let (left, at_mid) = self.panel(lo, mid, start, depth + 1)?;
        let (right, end) = self.panel(mid, hi, at_mid, depth + 1)?;
        Ok((PanelSums { survival: left.survival + right.survival, stationarity: left.stationarity + right.stationarity }, end))
    }

    fn boundaries(&self, t_cut: f64) -> Vec<f64> {
        let tm = fpt_mode_free(self.s);
        let mut b = vec![0.0];
        let early_end = (8.0 * tm).min(t_cut);
        let early_start = (tm / 40.0).min(early_end / 2.0);
        b.extend(log_space(early_start, early_end, 25));
        if t_cut > early_end {
            let n = ((t_cut - early_end) / (t_cut / 400.0)).ceil().max(1.0) as usize;
            b.extend((1..=n).map(|i| if i == n { t_cut } else { early_end + (t_cut - early_end) * i as f64 / n as f64 }));
        }
        b
    }

    fn run(&self) -> Result<OpenIntegrals> {
        let a_inf = laplace(self.s, self.lambda_m);
        let b_inf = laplace_first_moment(self.s, self.lambda_m);
        let mut t_cut =
            if b_inf.is_finite() { (CUT_EXPONENT / self.lambda_r + b_inf) / a_inf } else { 2.0 * CUT_EXPONENT / (self.lambda_r * a_inf) };
        for _ in 0..30 {
            let bounds = self.boundaries(t_cut);
            let mut k = KernelValues::default();
            let mut survival = 0.0;
            let mut stationarity = 0.0;
            for w in bounds.windows(2) {
                let (sums, end) = self.panel(w[0], w[1], k, 0)?;
                survival += sums.survival;
                stationarity += sums.stationarity;
                k = end;
            }
            if self.lambda_r * k.g() >= CUT_EXPONENT - 1e-9 {
                let tail = (-self.lambda_r * k.g()).exp() / (self.lambda_r * k.a);
                return Ok(OpenIntegrals { survival: survival + tail, stationarity });
            }
            t_cut *= 2.0;
        }
        Err(Error::QuadratureDepth { a: 0.0, b: t_cut, error: f64::INFINITY })
    }
}

fn open_integrals(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64) -> Result<OpenIntegrals> {
    if !(lambda_r > 0.0 && lambda_r.is_finite()) {
        return invalid("lambda_r must be positive for a finite mean first-passage time");
    }
    if !(lambda_m >= 0.0 && lambda_m.is_finite()) {
        return invalid("lambda_m must be finite and nonnegative");
    }
    OpenIntegrator { s, lambda_r, lambda_m, unit_tol: 1e-12 }.run()
}

/// Mean time until the first searcher of the open population hits.
pub fn mfpt_open(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64) -> Result<f64> {
    Ok(open_integrals(s, lambda_r, lambda_m)?.survival - 1.0 / lambda_r)
}

/// Residual of the stationarity condition for `λm` at fixed `α = λr/λm`:
/// `1/λm² − α² ∫ exp(-αλm g) (g + λm ∂g/∂λm) dt`. Zero at an interior optimum.
pub fn transcendental_residual(s: &FirstPassageSetup, alpha: f64, lambda_m: f64) -> Result<f64> {
    if !(alpha > 0.0 && lambda_m > 0.0) {
        return invalid("alpha and lambda_m must be positive");
    }
    let r = open_integrals(s, alpha * lambda_m, lambda_m)?;
    Ok(1.0 / (lambda_m * lambda_m) - alpha * alpha * r.stationarity)
}

/// Coarse scan plus golden-section refinement of the MFPT over `λm` at
/// `λr = α λm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfptScanResult {
    pub alpha: f64,
    pub lambda_m_grid: Vec<f64>,
    pub mfpt: Vec<f64>,
    pub lambda_m_star: f64,
    pub mfpt_star: f64,
    /// Stationarity residual at the optimum; a diagnostic, not a criterion.
    pub residual: f64,
    /// Set when the scan minimum sits on the bracket edge.
    pub boundary: Option<Boundary>,
}

fn check_bracket(bracket: (f64, f64)) -> Result<()> {
    if !(bracket.0 > 0.0 && bracket.1 > bracket.0 && bracket.1.is_finite()) {
        return invalid("rate bracket must satisfy 0 < lo < hi < inf");
    }
    Ok(())
}

struct Scan {
    grid: Vec<f64>,
    values: Vec<f64>,
    argmin: f64,
    min: f64,
    boundary: Option<Boundary>,
}

/// Scan a log grid, then refine between the neighbours of the grid minimum.
fn scan_and_refine<F>(f: F, bracket: (f64, f64), points: usize) -> Result<Scan>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = log_space(bracket.0, bracket.1, points);
    let values = grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let (i, _) = values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if i == 0 || i + 1 == grid.len() {
        let side = if i == 0 { Boundary::Lower } else { Boundary::Upper };
        return Ok(Scan { argmin: grid[i], min: values[i], grid, values, boundary: Some(side) });
    }
    let mut failure = None;
    let m = minimize_golden(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        grid[i - 1],
        grid[i + 1],
        1e-7 * grid[i],
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Scan { grid, values, argmin: m.argmin, min: m.min, boundary: None })
}

/// Optimal exit rate at fixed entry-to-exit ratio `alpha`.
pub fn optimal_exit(s: &FirstPassageSetup, alpha: f64, bracket: (f64, f64)) -> Result<MfptScanResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return invalid("alpha must be positive");
    }
    check_bracket(bracket)?;
    let scan = scan_and_refine(|lm| mfpt_open(s, alpha * lm, lm), bracket, SCAN_POINTS)?;
    let residual = transcendental_residual(s, alpha, scan.argmin)?;
    Ok(MfptScanResult {
        alpha,
        lambda_m_grid: scan.grid,
        mfpt: scan.values,
        lambda_m_star: scan.argmin,
        mfpt_star: scan.min,
        residual,
        boundary: scan.boundary,
    })
}

/// Mean hitting time of one searcher reset to `x0` at rate `r`.
/// At `r = 0` this is the plain mean `L / mu_bar`, finite only for `mu_bar > 0`.
pub fn mfpt_reset(s: &FirstPassageSetup, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return invalid("r must be finite and nonnegative");
    }
    let mb = s.params().mu_bar();
    let l = s.distance();
    if r == 0.0 {
        if mb <= 0.0 {
            return invalid("mean hitting time without resetting is infinite for mu_bar <= 0");
        }
        return Ok(l / mb);
    }
    let root = (mb * mb + 2.0 * r * s.params().sigma2()).sqrt();
    // (1 - T̃)/(r T̃) with T̃ = exp(-2rL/(mu_bar + root))
    Ok((2.0 * r * l / (mb + root)).exp_m1() / r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetOptimum {
    pub r_grid: Vec<f64>,
    pub mfpt: Vec<f64>,
    pub r_star: f64,
    pub mfpt_star: f64,
    pub boundary: Option<Boundary>,
}

/// Resetting rate minimizing [`mfpt_reset`] inside `bracket`.
pub fn optimal_reset(s: &FirstPassageSetup, bracket: (f64, f64)) -> Result<ResetOptimum> {
    check_bracket(bracket)?;
    let scan = scan_and_refine(|r| mfpt_reset(s, r), bracket, 4 * SCAN_POINTS)?;
    Ok(ResetOptimum { r_grid: scan.grid, mfpt: scan.values, r_star: scan.argmin, mfpt_star: scan.min, boundary: scan.boundary })
}

/// `ε_α`: optimal open-population MFPT over optimal resetting MFPT, both
/// searched in `bracket`. Values below one mean entry-exit is faster.
pub fn speedup_ratio(s: &FirstPassageSetup, alpha: f64, bracket: (f64, f64)) -> Result<f64> {
    let open = optimal_exit(s, alpha, bracket)?;
    let reset = optimal_reset(s, bracket)?;
    Ok(open.mfpt_star / reset.mfpt_star)
}

/// The `α` in `[lo, hi]` where the speed-up ratio crosses one.
pub fn critical_alpha(s: &FirstPassageSetup, lo: f64, hi: f64, bracket: (f64, f64)) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return invalid("alpha interval must satisfy 0 < lo < hi");
    }
    let reset = optimal_reset(s, bracket)?.mfpt_star;
    let mut failure = None;
    let root = find_root_bracketed(
        |a| match optimal_exit(s, a, bracket) {
            Ok(o) => o.mfpt_star / reset - 1.0,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-5,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root
}
