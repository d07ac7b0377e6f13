//! Raw Monte Carlo samples, for analyses the other commands do not cover.

use clap::{Args, Subcommand};
use gbmflow_core::mc::{simulate_ensemble_batch, simulate_fpt_open_batch, simulate_fpt_reset_batch, FptConfig};
use gbmflow_core::RngSpec;
use serde_json::json;

use crate::args::{default_step, ModelArgs, OutArgs, SearchArgs};
use crate::ensemble::ensemble_step;
use crate::error::{usage, CliResult};
use crate::output::{emit, RunManifest, Table};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(subcommand)]
    kind: SimKind,
}

#[derive(Subcommand, Debug)]
enum SimKind {
    /// Particle values of every run at each snapshot: columns run,t,x.
    Ensemble(EnsembleSim),
    /// One hit per run: columns hit_time,n_entries_used,generation.
    Fpt(FptSim),
}

#[derive(Args, Debug)]
struct EnsembleSim {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    t_end: f64,
    /// Comma-separated snapshot times [default: t_end].
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    dt: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct FptSim {
    #[command(flatten)]
    search: SearchArgs,
    /// Open population with this entry rate; omit for resetting or a lone searcher.
    #[arg(long)]
    lambda_r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    lambda_m: f64,
    /// Resetting rate (0 is a lone immortal searcher).
    #[arg(long, conflicts_with = "lambda_r")]
    reset_rate: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    dt: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

pub fn simulate(a: &SimulateArgs, argv: &[String]) -> CliResult<()> {
    match &a.kind {
        SimKind::Ensemble(e) => ensemble(e, argv),
        SimKind::Fpt(f) => fpt(f, argv),
    }
}

fn ensemble(a: &EnsembleSim, argv: &[String]) -> CliResult<()> {
    let p = a.model.build()?;
    let dt = ensemble_step(&p, a.dt);
    let runs = simulate_ensemble_batch(&p, a.t_end, dt, &a.snapshots, a.paths, RngSpec::new(a.seed, 0))?;
    let (mut run, mut t, mut x) = (Vec::new(), Vec::new(), Vec::new());
    for (i, r) in runs.iter().enumerate() {
        for state in r {
            for &v in &state.particles {
                run.push(i as f64);
                t.push(state.time);
                x.push(v);
            }
        }
    }
    let table = Table::new().column("run", run).column("t", t).column("x", x);
    let m = RunManifest::new("simulate", argv).params(&p).sampling(a.seed, a.paths).extra("dt", dt).extra("t_end", a.t_end);
    emit(&a.out.out, &table, None, m)
}

fn fpt(a: &FptSim, argv: &[String]) -> CliResult<()> {
    let s = a.search.build()?;
    let rng = RngSpec::new(a.seed, 0);
    let base = [s.params().mu(), s.params().sigma2()];
    let mut m = RunManifest::new("simulate", argv).params(s.params()).extra("x_target", s.x_target()).sampling(a.seed, a.paths);
    let samples = match (a.lambda_r, a.reset_rate) {
        (Some(lr), _) => {
            if !(lr > 0.0) {
                return usage("--lambda-r must be positive");
            }
            let dt = a.dt.unwrap_or_else(|| default_step(&[lr, a.lambda_m, base[0], base[1]]));
            m = m.extra("lambda_r", lr).extra("lambda_m", a.lambda_m).extra("dt", dt);
            simulate_fpt_open_batch(&s, lr, a.lambda_m, &FptConfig::new(dt), a.paths, rng)?
        }
        (None, r) => {
            let r = r.unwrap_or(0.0);
            let dt = a.dt.unwrap_or_else(|| default_step(&[r, base[0], base[1]]));
            m = m.extra("reset_rate", r).extra("dt", dt);
            simulate_fpt_reset_batch(&s, r, &FptConfig::new(dt), a.paths, rng)?
        }
    };
    let table = Table::new()
        .column("hit_time", samples.iter().map(|x| x.hit_time).collect())
        .column("n_entries_used", samples.iter().map(|x| x.n_entries_used as f64).collect())
        .column("generation", samples.iter().map(|x| x.generation as f64).collect());
    let summary = json!({ "params": s.params(), "x_target": s.x_target(), "runs": samples.len() });
    emit(&a.out.out, &table, Some(summary), m)
}
