//! Adaptive Gauss–Kronrod quadrature and running integrals on grids.
//!
//! The panel rule is the 7-point Gauss / 15-point Kronrod pair. The Kronrod
//! sum is the panel estimate and the Gauss–Kronrod difference, rescaled the
//! way QUADPACK does it, is the embedded error estimate. Panels are bisected
//! globally (worst error first) until the summed estimate meets the tolerance.

use crate::error::{invalid, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Hard cap on the number of live panels in one adaptive integration.
const MAX_PANELS: usize = 20_000;

/// Tolerances and depth limit for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return invalid("abs_tol must be positive");
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return invalid("rel_tol must be positive");
        }
        if max_depth < 10 {
            return invalid("max_depth must be at least 10");
        }
        Ok(Self { abs_tol, rel_tol, max_depth })
    }

    /// Absolute tolerance only (relative tolerance set to machine-epsilon scale).
    pub fn absolute(abs_tol: f64) -> Self {
        Self { abs_tol, rel_tol: 1e-14, max_depth: 50 }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 50 }
    }
}

/// Value and error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// One Gauss–Kronrod panel: (kronrod value, error estimate, ∫|f|).
pub fn gauss_kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        resk += WGK[j] * sum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * sum;
        }
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let result = resk * half;
    resabs *= abs_half;
    resasc *= abs_half;
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err, resabs)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
    depth: u32,
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, depth: u32) -> Panel {
    let (value, error, resabs) = gauss_kronrod15(f, a, b);
    Panel { a, b, value, error, resabs, depth }
}

/// Integrate `f` over `[a, b]` to `max(abs_tol, rel_tol·|result|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: QuadratureSpec) -> Result<Integral> {
    integrate_adaptive_panels(f, a, b, 1, spec)
}

/// As [`integrate_adaptive`], starting from `initial_panels` equal panels.
///
/// Useful when the integrand has a known feature (a sharp peak) that a single
/// starting panel might step over.
pub fn integrate_adaptive_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    spec: QuadratureSpec,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return invalid("integration limits must be finite");
    }
    if a > b {
        return invalid("integration requires a <= b");
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, panels: 0 });
    }
    let n0 = initial_panels.clamp(1, MAX_PANELS / 2);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { a + width * (i + 1) as f64 };
            panel(&mut f, lo, hi, 0)
        })
        .collect();

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let resabs: f64 = panels.iter().map(|p| p.resabs).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs()).max(100.0 * f64::EPSILON * resabs);
        if !value.is_finite() {
            let worst = panels.iter().find(|p| !p.value.is_finite()).copied().unwrap_or(panels[0]);
            return Err(Error::QuadratureDepth { a: worst.a, b: worst.b, error: f64::INFINITY });
        }
        if error <= tol {
            return Ok(Integral { value, error, panels: panels.len() });
        }
        let (idx, worst) =
            panels.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).map(|(i, p)| (i, *p)).expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= spec.max_depth || panels.len() >= MAX_PANELS || mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureDepth { a: worst.a, b: worst.b, error: worst.error });
        }
        panels[idx] = panel(&mut f, worst.a, mid, worst.depth + 1);
        panels.push(panel(&mut f, mid, worst.b, worst.depth + 1));
    }
}

/// Semi-infinite integral split as `∫_a^cutoff f + tail`, where `tail` is a
/// closed-form estimate of `∫_cutoff^∞ f` supplied by the caller.
pub fn integrate_with_tail<F: FnMut(f64) -> f64>(f: F, a: f64, cutoff: f64, tail: f64, spec: QuadratureSpec) -> Result<Integral> {
    let body = integrate_adaptive(f, a, cutoff, spec)?;
    Ok(Integral { value: body.value + tail, error: body.error + tail.abs(), panels: body.panels })
}

/// Running trapezoid integral of samples `ys` on the increasing grid `xs`,
/// starting at zero. Exact for piecewise-linear integrands.
pub fn cumulative_integral(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return invalid("grid and samples must have equal length");
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("grid must be strictly increasing");
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    if !xs.is_empty() {
        out.push(0.0);
    }
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Trapezoid integral of samples on a grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
