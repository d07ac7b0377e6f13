//! First-passage commands.

use clap::{Args, ValueEnum};
use gbmflow_core::mc::{histogram_density, mean_estimate, simulate_fpt_open_batch, simulate_fpt_reset_batch, FptConfig};
use gbmflow_core::numerics::{lin_space, log_space};
use gbmflow_core::passage::{
    critical_alpha, fpt_density_free, fpt_density_open_curve, fpt_mode_free, mfpt_open, optimal_exit, optimal_reset, speedup_ratio,
    DEFAULT_RATE_BRACKET,
};
use gbmflow_core::{FirstPassageSetup, GridSpec, RngSpec};
use serde_json::json;

use crate::args::{McArgs, OutArgs, SearchArgs};
use crate::ensemble::bin_edges;
use crate::error::{usage, CliResult};
use crate::output::{emit, RunManifest, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FptMode {
    /// One immortal searcher.
    Free,
    /// Searchers recruited at lambda_r, each leaving at lambda_m.
    Open,
}

#[derive(Args, Debug)]
pub struct FptArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = FptMode::Free)]
    mode: FptMode,
    #[arg(long, default_value_t = 0.0)]
    lambda_r: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_m: f64,
    #[arg(long, default_value_t = 50.0)]
    t_max: f64,
    #[arg(long, default_value_t = 500)]
    points: usize,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct RateBracket {
    /// Search interval for optimal rates.
    #[arg(long, default_value_t = DEFAULT_RATE_BRACKET.0)]
    rate_min: f64,
    #[arg(long, default_value_t = DEFAULT_RATE_BRACKET.1)]
    rate_max: f64,
}

impl RateBracket {
    fn get(&self) -> CliResult<(f64, f64)> {
        if !(self.rate_min > 0.0 && self.rate_max > self.rate_min && self.rate_max.is_finite()) {
            return usage("rate bracket needs 0 < --rate-min < --rate-max");
        }
        Ok((self.rate_min, self.rate_max))
    }
}

#[derive(Args, Debug)]
pub struct MfptArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// Ratio lambda_r / lambda_m held fixed along the scan.
    #[arg(long, required_unless_present = "optimal_locus")]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    lm_min: f64,
    #[arg(long, default_value_t = 2.0)]
    lm_max: f64,
    #[arg(long, default_value_t = 40)]
    points: usize,
    /// Emit the optimal exit rate as a function of alpha instead of a scan.
    #[arg(long)]
    optimal_locus: bool,
    #[arg(long, default_value_t = 0.5)]
    alpha_min: f64,
    #[arg(long, default_value_t = 10.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 20)]
    alpha_points: usize,
    #[command(flatten)]
    bracket: RateBracket,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SpeedupArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 0.5)]
    alpha_min: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 15)]
    points: usize,
    /// Interval searched for the alpha where the speed-up ratio crosses 1.
    #[arg(long, default_value_t = 1.0)]
    critical_min: f64,
    #[arg(long, default_value_t = 3.0)]
    critical_max: f64,
    #[command(flatten)]
    bracket: RateBracket,
    #[command(flatten)]
    out: OutArgs,
}

fn check_grid(lo: f64, hi: f64, points: usize, what: &str) -> CliResult<()> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return usage(format!("{what} grid needs 0 < min < max and at least 2 points"));
    }
    Ok(())
}

fn fpt_step(s: &FirstPassageSetup, mc: &McArgs, lambda_r: f64, lambda_m: f64) -> f64 {
    mc.step(&[lambda_r, lambda_m, s.params().mu(), s.params().sigma2()])
}

fn manifest(command: &str, argv: &[String], s: &FirstPassageSetup) -> RunManifest {
    RunManifest::new(command, argv).params(s.params()).extra("x_target", s.x_target())
}

pub fn fpt(a: &FptArgs, argv: &[String]) -> CliResult<()> {
    let s = a.search.build()?;
    if !(a.t_max > 0.0 && a.t_max.is_finite()) || a.points < 2 {
        return usage("time grid needs t_max > 0 and at least 2 points");
    }
    let ts = lin_space(a.t_max / a.points as f64, a.t_max, a.points);
    let mut m = manifest("fpt", argv, &s).grid(GridSpec::linear(ts[0], a.t_max, a.points));
    let (density, mean) = match a.mode {
        FptMode::Free => {
            let d = ts.iter().map(|&t| fpt_density_free(&s, t)).collect::<gbmflow_core::Result<Vec<_>>>()?;
            let mb = s.params().mu_bar();
            (d, (mb > 0.0).then(|| s.distance() / mb))
        }
        FptMode::Open => {
            if !(a.lambda_r > 0.0) {
                return usage("open mode needs --lambda-r > 0");
            }
            m = m.extra("lambda_r", a.lambda_r).extra("lambda_m", a.lambda_m);
            (fpt_density_open_curve(&s, a.lambda_r, a.lambda_m, &ts)?, Some(mfpt_open(&s, a.lambda_r, a.lambda_m)?))
        }
    };
    let mut table = Table::new().column("t", ts.clone()).column("p_analytic", density);
    let mut mc_mean = None;
    if a.mc.mc {
        let rng = RngSpec::new(a.mc.seed, 0);
        let samples = match a.mode {
            FptMode::Free => simulate_fpt_reset_batch(&s, 0.0, &FptConfig::new(fpt_step(&s, &a.mc, 0.0, 0.0)), a.mc.paths, rng)?,
            FptMode::Open => {
                let cfg = FptConfig::new(fpt_step(&s, &a.mc, a.lambda_r, a.lambda_m));
                simulate_fpt_open_batch(&s, a.lambda_r, a.lambda_m, &cfg, a.mc.paths, rng)?
            }
        };
        let hits: Vec<f64> = samples.iter().map(|x| x.hit_time).collect();
        let d = histogram_density(&hits, &bin_edges(&ts, false))?;
        let se = d.std_errors().map(<[f64]>::to_vec).unwrap_or_default();
        table = table.column("p_mc", d.values().to_vec()).column("p_mc_se", se);
        let e = mean_estimate(&hits)?;
        mc_mean = Some(json!({ "mean": e.mean, "std_error": e.std_error }));
        m = m.sampling(a.mc.seed, a.mc.paths);
    }
    let summary = json!({
        "params": s.params(),
        "x_target": s.x_target(),
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "lambda_r": a.lambda_r,
        "lambda_m": a.lambda_m,
        "free_mode_time": fpt_mode_free(&s),
        "mean_hit_time": mean,
        "mc_hit_time": mc_mean,
    });
    emit(&a.out.out, &table, Some(summary), m)
}

pub fn mfpt(a: &MfptArgs, argv: &[String]) -> CliResult<()> {
    let s = a.search.build()?;
    let bracket = a.bracket.get()?;
    if a.optimal_locus {
        return locus(a, &s, bracket, argv);
    }
    let alpha = a.alpha.expect("clap enforces --alpha");
    if !(alpha > 0.0 && alpha.is_finite()) {
        return usage("--alpha must be positive: lambda_r = alpha * lambda_m must not vanish");
    }
    check_grid(a.lm_min, a.lm_max, a.points, "lambda_m")?;
    let lms = log_space(a.lm_min, a.lm_max, a.points);
    let values = lms.iter().map(|&lm| mfpt_open(&s, alpha * lm, lm)).collect::<gbmflow_core::Result<Vec<_>>>()?;
    let mut table = Table::new().column("lambda_m", lms.clone()).column("mfpt", values);
    let mut m = manifest("mfpt", argv, &s).extra("alpha", alpha).grid(GridSpec::log(a.lm_min, a.lm_max, a.points));
    if a.mc.mc {
        let (mut mean, mut se) = (Vec::new(), Vec::new());
        for (i, &lm) in lms.iter().enumerate() {
            let cfg = FptConfig::new(fpt_step(&s, &a.mc, alpha * lm, lm));
            let samples = simulate_fpt_open_batch(&s, alpha * lm, lm, &cfg, a.mc.paths, RngSpec::new(a.mc.seed, i as u64))?;
            let e = mean_estimate(&samples.iter().map(|x| x.hit_time).collect::<Vec<_>>())?;
            mean.push(e.mean);
            se.push(e.std_error);
        }
        table = table.column("mfpt_mc", mean).column("mfpt_se", se);
        m = m.sampling(a.mc.seed, a.mc.paths);
    }
    let o = optimal_exit(&s, alpha, bracket)?;
    let summary = json!({
        "params": s.params(),
        "x_target": s.x_target(),
        "alpha": alpha,
        "lambda_m_star": o.lambda_m_star,
        "mfpt_star": o.mfpt_star,
        "residual": o.residual,
        "boundary_optimum": o.boundary,
        "rate_bracket": [bracket.0, bracket.1],
    });
    emit(&a.out.out, &table, Some(summary), m)
}

fn locus(a: &MfptArgs, s: &FirstPassageSetup, bracket: (f64, f64), argv: &[String]) -> CliResult<()> {
    check_grid(a.alpha_min, a.alpha_max, a.alpha_points, "alpha")?;
    let alphas = log_space(a.alpha_min, a.alpha_max, a.alpha_points);
    let mut cols: [Vec<f64>; 4] = Default::default();
    for &alpha in &alphas {
        let o = optimal_exit(s, alpha, bracket)?;
        cols[0].push(o.lambda_m_star);
        cols[1].push(o.mfpt_star);
        cols[2].push(o.residual);
        cols[3].push(if o.boundary.is_none() { 1.0 } else { 0.0 });
    }
    let [lm, t, res, interior] = cols;
    let table = Table::new()
        .column("alpha", alphas)
        .column("lambda_m_star", lm)
        .column("mfpt_star", t)
        .column("residual", res)
        .column("interior", interior);
    let m = manifest("mfpt", argv, s).grid(GridSpec::log(a.alpha_min, a.alpha_max, a.alpha_points));
    let summary = json!({ "params": s.params(), "x_target": s.x_target(), "rate_bracket": [bracket.0, bracket.1] });
    emit(&a.out.out, &table, Some(summary), m)
}

pub fn speedup(a: &SpeedupArgs, argv: &[String]) -> CliResult<()> {
    let s = a.search.build()?;
    let bracket = a.bracket.get()?;
    check_grid(a.alpha_min, a.alpha_max, a.points, "alpha")?;
    let alphas = lin_space(a.alpha_min, a.alpha_max, a.points);
    let eps = alphas.iter().map(|&al| speedup_ratio(&s, al, bracket)).collect::<gbmflow_core::Result<Vec<_>>>()?;
    let table = Table::new().column("alpha", alphas).column("epsilon", eps);
    let ac = critical_alpha(&s, a.critical_min, a.critical_max, bracket)?;
    let r = optimal_reset(&s, bracket)?;
    let summary = json!({
        "params": s.params(),
        "x_target": s.x_target(),
        "alpha_c": ac,
        "r_star": r.r_star,
        "mfpt_reset_star": r.mfpt_star,
        "reset_boundary_optimum": r.boundary,
        "rate_bracket": [bracket.0, bracket.1],
    });
    let m = manifest("speedup", argv, &s).grid(GridSpec::linear(a.alpha_min, a.alpha_max, a.points));
    emit(&a.out.out, &table, Some(summary), m)
}
