//! Open-population ensemble on a time grid of step `dt`.
//!
//! Each step moves every unit by an exact log-normal factor, then removes
//! each unit with probability `1 − e^{−λm dt}`, then inserts
//! `Poisson(λr dt)` new units at `x0`.
//!
//! [`simulate_ensemble`] draws a path with exactly that law without visiting
//! every step: a unit inserted after step `k` dies after step
//! `k + ⌈E/dt⌉` with `E ~ Exp(λm)` (the geometric number of survived steps),
//! the per-step Poisson insertions are the arrivals of a rate-`λr` Poisson
//! process rounded up to the grid, and log-values only need to be drawn at the
//! snapshots because GBM increments compose. [`simulate_ensemble_stepped`]
//! is the literal step-by-step loop, kept as a second route.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::RngSpec;
use crate::error::{invalid, Result};
use crate::params::ModelParams;

/// Units alive at one snapshot time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub time: f64,
    pub particles: Vec<f64>,
}

/// Largest admissible `dt·max(λm, λr, |μ|, σ²)`.
pub const DT_STABILITY: f64 = 0.1;

pub(crate) fn check_dt(rates: &[f64], dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return invalid("dt must be positive");
    }
    let fastest = rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if dt * fastest >= DT_STABILITY {
        return invalid(format!("dt = {dt} too large: dt·max(lambda_m, lambda_r, |mu|, sigma^2) must be below {DT_STABILITY}"));
    }
    Ok(())
}

fn snapshot_steps(p: &ModelParams, t_end: f64, dt: f64, snapshots: &[f64]) -> Result<Vec<u64>> {
    check_dt(&[p.lambda_m(), p.lambda_r(), p.mu(), p.sigma2()], dt)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return invalid("t_end must be finite and nonnegative");
    }
    let times = if snapshots.is_empty() { vec![t_end] } else { snapshots.to_vec() };
    if times.iter().any(|&t| !(t >= 0.0 && t <= t_end)) || times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("snapshot times must be nondecreasing and within [0, t_end]");
    }
    Ok(times.iter().map(|t| (t / dt).round() as u64).collect())
}

fn steps_until(e: f64, dt: f64) -> u64 {
    let k = (e / dt).ceil();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        (k as u64).max(1)
    }
}

/// Snapshots of one ensemble path starting from a single unit at `x0`.
/// Snapshot times are rounded to the nearest step; `snapshots` empty means
/// `[t_end]`.
pub fn simulate_ensemble(p: &ModelParams, t_end: f64, dt: f64, snapshots: &[f64], rng: RngSpec) -> Result<Vec<EnsembleState>> {
    let steps = snapshot_steps(p, t_end, dt, snapshots)?;
    let mut rng = rng.rng();
    let last = *steps.last().expect("at least one snapshot");
    let mut out: Vec<EnsembleState> = steps.iter().map(|&s| EnsembleState { time: s as f64 * dt, particles: Vec::new() }).collect();
    let (mb, sigma, x0) = (p.mu_bar(), p.sigma(), p.x0());
    let death = (p.lambda_m() > 0.0).then(|| Exp::new(p.lambda_m()).expect("positive rate"));
    let arrival = (p.lambda_r() > 0.0).then(|| Exp::new(p.lambda_r()).expect("positive rate"));

    let place = |rng: &mut rand_chacha::ChaCha8Rng, born: u64, out: &mut Vec<EnsembleState>| {
        let dies = death.as_ref().map_or(u64::MAX, |d| born.saturating_add(steps_until(d.sample(rng), dt)));
        let mut y = 0.0;
        let mut prev = born;
        for (j, &s) in steps.iter().enumerate() {
            if s < born {
                continue;
            }
            if s >= dies {
                break;
            }
            if s > prev {
                let el = (s - prev) as f64 * dt;
                let z: f64 = rng.sample(StandardNormal);
                y += mb * el + sigma * el.sqrt() * z;
                prev = s;
            }
            out[j].particles.push(x0 * y.exp());
        }
    };

    place(&mut rng, 0, &mut out);
    if let Some(arr) = arrival {
        let mut a = 0.0;
        loop {
            a += arr.sample(&mut rng);
            let k = steps_until(a, dt);
            if k > last {
                break;
            }
            place(&mut rng, k, &mut out);
        }
    }
    Ok(out)
}

/// Literal step-by-step simulation of the same process.
pub fn simulate_ensemble_stepped(p: &ModelParams, t_end: f64, dt: f64, snapshots: &[f64], rng: RngSpec) -> Result<Vec<EnsembleState>> {
    let steps = snapshot_steps(p, t_end, dt, snapshots)?;
    let mut rng = rng.rng();
    let last = *steps.last().expect("at least one snapshot");
    let kill = -(-p.lambda_m() * dt).exp_m1();
    let births = (p.lambda_r() > 0.0).then(|| Poisson::new(p.lambda_r() * dt).expect("positive mean"));
    let (drift, vol) = (p.mu_bar() * dt, p.sigma() * dt.sqrt());
    let mut logs = vec![0.0f64];
    let mut out = Vec::with_capacity(steps.len());
    let mut next = 0;
    for k in 0..=last {
        if k > 0 {
            for y in logs.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *y += drift + vol * z;
            }
            logs.retain(|_| !rng.random_bool(kill));
            if let Some(b) = &births {
                let n: f64 = b.sample(&mut rng);
                logs.extend(std::iter::repeat(0.0).take(n as usize));
            }
        }
        while next < steps.len() && steps[next] == k {
            out.push(EnsembleState { time: k as f64 * dt, particles: logs.iter().map(|y| p.x0() * y.exp()).collect() });
            next += 1;
        }
    }
    Ok(out)
}

/// `runs` independent paths on child streams of `rng`, in run order.
pub fn simulate_ensemble_batch(
    p: &ModelParams,
    t_end: f64,
    dt: f64,
    snapshots: &[f64],
    runs: usize,
    rng: RngSpec,
) -> Result<Vec<Vec<EnsembleState>>> {
    (0..runs as u64).into_par_iter().map(|i| simulate_ensemble(p, t_end, dt, snapshots, rng.child(i))).collect()
}
