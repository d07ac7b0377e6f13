//! Commands for the ensemble: densities, moments, core boundary, population.

use clap::{ArgAction, Args};
use gbmflow_core::ensemble::{log_moment, LogOrder};
use gbmflow_core::mc::{gillespie_batch, histogram_density, mean_estimate, ratio_estimate, simulate_ensemble_batch, EnsembleState};
use gbmflow_core::numerics::lin_space;
use gbmflow_core::*;
use serde_json::{json, Value};

use crate::args::{default_step, McArgs, ModelArgs, OutArgs};
use crate::error::{usage, CliResult};
use crate::output::{emit, RunManifest, Table};

#[derive(Args, Debug)]
pub struct StationaryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Lower end of the x grid [default: x0/1e3, clipped where the density is below 1e-30].
    #[arg(long)]
    x_min: Option<f64>,
    /// Upper end of the x grid [default: x0*1e3, clipped likewise].
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    log_grid: bool,
    #[command(flatten)]
    mc: McArgs,
    /// Simulated time before the histogram is taken [default: 20/lambda_m].
    #[arg(long)]
    t_relax: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Observation time.
    #[arg(long)]
    t: f64,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    log_grid: bool,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Replace lambda_m by beta(n), the linear-growth boundary of the n-th moment.
    #[arg(long, value_name = "N")]
    lambda_m_at_beta: Option<u32>,
    #[arg(long, default_value_t = 50.0)]
    t_max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 50.0)]
    t_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct PopulationArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// End of the time grid [default: 3/lambda_m].
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 31)]
    points: usize,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

fn x_grid(p: &ModelParams, x_min: Option<f64>, x_max: Option<f64>, points: usize, log: bool) -> CliResult<(Vec<f64>, GridSpec)> {
    let lo = x_min.unwrap_or(p.x0() / 1e3);
    let hi = x_max.unwrap_or(p.x0() * 1e3);
    let spec = GridSpec { lo, hi, points, log };
    Ok((spec.build()?, spec))
}

fn time_grid(t_max: f64, points: usize) -> CliResult<(Vec<f64>, GridSpec)> {
    if !(t_max > 0.0 && t_max.is_finite()) || points < 2 {
        return usage("time grid needs t_max > 0 and at least 2 points");
    }
    Ok((lin_space(0.0, t_max, points), GridSpec::linear(0.0, t_max, points)))
}

/// Bin edges halfway between grid points, so that each bin is centred on one.
pub(crate) fn bin_edges(xs: &[f64], log: bool) -> Vec<f64> {
    let mid = |a: f64, b: f64| if log { (a * b).sqrt() } else { 0.5 * (a + b) };
    let n = xs.len();
    let mut edges = Vec::with_capacity(n + 1);
    let first = if log { xs[0] * (xs[0] / xs[1]).sqrt() } else { xs[0] - 0.5 * (xs[1] - xs[0]) };
    edges.push(first);
    edges.extend(xs.windows(2).map(|w| mid(w[0], w[1])));
    edges.push(if log { xs[n - 1] * (xs[n - 1] / xs[n - 2]).sqrt() } else { xs[n - 1] + 0.5 * (xs[n - 1] - xs[n - 2]) });
    edges
}

fn rates(p: &ModelParams) -> [f64; 4] {
    [p.lambda_r(), p.lambda_m(), p.mu(), p.sigma2()]
}

fn pooled(runs: &[Vec<EnsembleState>], k: usize) -> Vec<f64> {
    runs.iter().flat_map(|r| r[k].particles.iter().copied()).collect()
}

fn mc_density(table: Table, xs: &[f64], log: bool, samples: &[f64]) -> CliResult<Table> {
    let d = histogram_density(samples, &bin_edges(xs, log))?;
    let se = d.std_errors().map(<[f64]>::to_vec).unwrap_or_default();
    Ok(table.column("f_mc", d.values().to_vec()).column("f_mc_se", se))
}

fn moment_json(p: &ModelParams, n: u32) -> CliResult<Value> {
    Ok(match stationary_moment(p, n)? {
        StationaryMoment::Finite(v) => json!({ "finite": v }),
        StationaryMoment::Diverges(Divergence::Linear) => json!({ "diverges": "linear" }),
        StationaryMoment::Diverges(Divergence::Exponential { rate }) => json!({ "diverges": "exponential", "rate": rate }),
    })
}

pub fn stationary(a: &StationaryArgs, argv: &[String]) -> CliResult<()> {
    let p = a.model.build()?;
    let sd = StationaryDensityParams::new(&p)?;
    let (xs, spec) = if a.x_min.is_none() && a.x_max.is_none() && a.log_grid {
        let xs = default_stationary_grid(&p)?;
        let spec = GridSpec::log(xs[0], xs[xs.len() - 1], xs.len());
        (xs, spec)
    } else {
        x_grid(&p, a.x_min, a.x_max, a.points, a.log_grid)?
    };
    let f = stationary_density(&p, &xs)?;
    let mut table = Table::new().column("x", xs.clone()).column("f_analytic", f.values().to_vec());
    let mut manifest = RunManifest::new("stationary", argv).params(&p).grid(spec);
    if a.mc.mc {
        let t = a.t_relax.unwrap_or(20.0 / p.lambda_m());
        let runs = simulate_ensemble_batch(&p, t, a.mc.step(&rates(&p)), &[t], a.mc.paths, RngSpec::new(a.mc.seed, 0))?;
        table = mc_density(table, &xs, a.log_grid, &pooled(&runs, 0))?;
        manifest = manifest.sampling(a.mc.seed, a.mc.paths).extra("t_relax", t);
    }
    let summary = json!({
        "params": p,
        "exponent_above": sd.exponent_above,
        "exponent_below": sd.exponent_below,
        "prefactor": sd.prefactor,
        "upper_tail_power": sd.upper_tail_power(),
        "lower_tail_power": sd.lower_tail_power(),
        "mean": moment_json(&p, 1)?,
        "second_moment": moment_json(&p, 2)?,
    });
    emit(&a.out.out, &table, Some(summary), manifest)
}

pub fn density(a: &DensityArgs, argv: &[String]) -> CliResult<()> {
    let p = a.model.build()?;
    if !(a.t > 0.0 && a.t.is_finite()) {
        return usage("--t must be positive");
    }
    let (xs, spec) = x_grid(&p, a.x_min, a.x_max, a.points, a.log_grid)?;
    let f = density_finite_time(&p, a.t, &xs)?;
    let mut table = Table::new().column("x", xs.clone()).column("f_analytic", f.values().to_vec());
    let mut manifest = RunManifest::new("density", argv).params(&p).grid(spec).extra("t", a.t);
    if a.mc.mc {
        let runs = simulate_ensemble_batch(&p, a.t, a.mc.step(&rates(&p)), &[a.t], a.mc.paths, RngSpec::new(a.mc.seed, 0))?;
        table = mc_density(table, &xs, a.log_grid, &pooled(&runs, 0))?;
        manifest = manifest.sampling(a.mc.seed, a.mc.paths);
    }
    let summary = json!({ "params": p, "t": a.t, "units_expected": phi(&p, a.t)? });
    emit(&a.out.out, &table, Some(summary), manifest)
}

/// Shared driver for the moment and log-moment commands.
fn moment_table(
    a: &MomentsArgs,
    p: &ModelParams,
    names: [&str; 6],
    analytic: impl Fn(f64) -> gbmflow_core::Result<(f64, f64)>,
    sample: impl Fn(f64) -> (f64, f64),
) -> CliResult<(Table, RunManifest, GridSpec)> {
    let (ts, spec) = time_grid(a.t_max, a.points)?;
    let (first, second): (Vec<f64>, Vec<f64>) =
        ts.iter().map(|&t| analytic(t)).collect::<gbmflow_core::Result<Vec<_>>>()?.into_iter().unzip();
    let mut table = Table::new().column("t", ts.clone()).column(names[0], first).column(names[1], second);
    let mut manifest = RunManifest::new("", &[]).params(p).grid(spec);
    if a.mc.mc {
        let runs = simulate_ensemble_batch(p, a.t_max, a.mc.step(&rates(p)), &ts, a.mc.paths, RngSpec::new(a.mc.seed, 0))?;
        let mut cols: [Vec<f64>; 4] = Default::default();
        for k in 0..ts.len() {
            let counts: Vec<f64> = runs.iter().map(|r| r[k].particles.len() as f64).collect();
            let (s1, s2): (Vec<f64>, Vec<f64>) = runs
                .iter()
                .map(|r| {
                    r[k].particles.iter().fold((0.0, 0.0), |(a, b), &x| {
                        let (u, v) = sample(x);
                        (a + u, b + v)
                    })
                })
                .unzip();
            let (e1, e2) = (ratio_estimate(&s1, &counts)?, ratio_estimate(&s2, &counts)?);
            for (col, v) in cols.iter_mut().zip([e1.mean, e1.std_error, e2.mean, e2.std_error]) {
                col.push(v);
            }
        }
        for (name, col) in names[2..].iter().zip(cols) {
            table = table.column(name, col);
        }
        manifest = manifest.sampling(a.mc.seed, a.mc.paths);
    }
    Ok((table, manifest, spec))
}

fn moments_params(a: &MomentsArgs) -> CliResult<ModelParams> {
    let p = a.model.build()?;
    Ok(match a.lambda_m_at_beta {
        Some(n) => p.with_rates(p.lambda_r(), beta(&p, n)?)?,
        None => p,
    })
}

pub fn moments(a: &MomentsArgs, argv: &[String]) -> CliResult<()> {
    let p = moments_params(a)?;
    let x0 = p.x0();
    let (table, mut manifest, _) = moment_table(
        a,
        &p,
        ["mean", "msd", "mean_mc", "mean_se", "msd_mc", "msd_se"],
        |t| Ok((moment(&p, 1, t)?, msd(&p, t)?)),
        |x| (x, (x - x0).powi(2)),
    )?;
    manifest.command = "moments".into();
    manifest.argv = argv.to_vec();
    let summary = json!({
        "params": p,
        "beta_1": beta(&p, 1)?,
        "beta_2": beta(&p, 2)?,
        "mean": if p.lambda_m() > 0.0 { moment_json(&p, 1)? } else { Value::Null },
        "second_moment": if p.lambda_m() > 0.0 { moment_json(&p, 2)? } else { Value::Null },
    });
    emit(&a.out.out, &table, Some(summary), manifest)
}

pub fn logmoments(a: &MomentsArgs, argv: &[String]) -> CliResult<()> {
    let p = moments_params(a)?;
    let l0 = p.x0().ln();
    let (table, mut manifest, _) = moment_table(
        a,
        &p,
        ["log_mean", "log_msd", "log_mean_mc", "log_mean_se", "log_msd_mc", "log_msd_se"],
        |t| Ok((log_moment(&p, LogOrder::First, t)?, log_msd(&p, t)?)),
        |x| (x.ln(), (x.ln() - l0).powi(2)),
    )?;
    manifest.command = "logmoments".into();
    manifest.argv = argv.to_vec();
    let summary = json!({
        "params": p,
        "log_mean_asymptote": stationary_log_mean(&p).ok(),
        "log_msd_asymptote": stationary_log_msd(&p).ok(),
    });
    emit(&a.out.out, &table, Some(summary), manifest)
}

pub fn boundary(a: &BoundaryArgs, argv: &[String]) -> CliResult<()> {
    let p = a.model.build()?;
    let (ts, spec) = time_grid(a.t_max, a.points)?;
    let (lo, hi): (Vec<f64>, Vec<f64>) =
        ts.iter().map(|&t| core_boundary(&p, t)).collect::<gbmflow_core::Result<Vec<_>>>()?.into_iter().unzip();
    let table = Table::new().column("t", ts).column("x_low", lo).column("x_high", hi);
    let ld = LdfParams::new(&p);
    let summary = json!({ "params": p, "y_star": ld.y_star, "a": ld.a });
    emit(&a.out.out, &table, Some(summary), RunManifest::new("boundary", argv).params(&p).grid(spec))
}

pub fn population(a: &PopulationArgs, argv: &[String]) -> CliResult<()> {
    let p = a.model.build()?;
    let t_max = match a.t_max {
        Some(t) => t,
        None if p.lambda_m() > 0.0 => 3.0 / p.lambda_m(),
        None => return usage("--t-max is required when lambda_m = 0"),
    };
    if a.paths < 2 {
        return usage("--paths must be at least 2");
    }
    let (ts, spec) = time_grid(t_max, a.points)?;
    let analytic = ts.iter().map(|&t| phi(&p, t)).collect::<gbmflow_core::Result<Vec<_>>>()?;
    let runs = gillespie_batch(&p, &ts, a.paths, RngSpec::new(a.seed, 0))?;
    let (mut mean, mut se) = (Vec::new(), Vec::new());
    for k in 0..ts.len() {
        let e = mean_estimate(&runs.iter().map(|r| r.values()[k]).collect::<Vec<_>>())?;
        mean.push(e.mean);
        se.push(e.std_error);
    }
    let table = Table::new().column("t", ts).column("phi_analytic", analytic).column("phi_gillespie", mean).column("phi_se", se);
    let manifest = RunManifest::new("population", argv).params(&p).grid(spec).sampling(a.seed, a.paths);
    let limit = if p.lambda_m() > 0.0 { Some(p.lambda_r() / p.lambda_m()) } else { None };
    emit(&a.out.out, &table, Some(json!({ "params": p, "phi_limit": limit })), manifest)
}

pub(crate) fn ensemble_step(p: &ModelParams, dt: Option<f64>) -> f64 {
    dt.unwrap_or_else(|| default_step(&rates(p)))
}
