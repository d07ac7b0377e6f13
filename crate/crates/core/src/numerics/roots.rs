//! Bracketed root finding and golden-section minimization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method on `[lo, hi]`. Falls back to bisection whenever the
/// interpolation step is not contracting fast enough, so it always converges
/// once a sign change is given.
pub fn find_root_bracketed<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid("root tolerance must be positive");
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Which end of the search interval the minimizer ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Lower,
    Upper,
}

/// Result of [`minimize_golden`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMin {
    pub argmin: f64,
    pub min: f64,
    /// Set when the minimum sits on an end of the interval (monotone objective).
    pub boundary: Option<Boundary>,
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// contracting the bracket below `tol`.
pub fn minimize_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<GoldenMin> {
    if !(lo < hi) {
        return invalid("golden-section search requires lo < hi");
    }
    if !(tol > 0.0) {
        return invalid("golden-section tolerance must be positive");
    }
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while (b - a) > tol && iter < 4 * MAX_ITER {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        iter += 1;
    }
    let (mut argmin, mut min) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let mut boundary = None;
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo <= min {
        argmin = lo;
        min = f_lo;
        boundary = Some(Boundary::Lower);
    }
    if f_hi < min {
        argmin = hi;
        min = f_hi;
        boundary = Some(Boundary::Upper);
    }
    Ok(GoldenMin { argmin, min, boundary })
}
