//! Shared numerical kernels: quadrature, running integrals, roots, minimization.

mod quad;
mod roots;

pub use quad::{
    cumulative_integral, gauss_kronrod15, integrate_adaptive, integrate_adaptive_panels, integrate_with_tail, trapezoid, Integral,
    QuadratureSpec,
};
pub use roots::{find_root_bracketed, minimize_golden, Boundary, GoldenMin};

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}
