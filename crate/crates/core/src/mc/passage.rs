//! First-passage simulators in log space, `y = log(x/x0)`, target `L`.
//!
//! Paths advance by exact Gaussian increments of at most `dt`. A step whose
//! Brownian-bridge crossing probability `exp(−2(L−y₁)(L−y₂)/(σ²h))` is not
//! negligible (or whose end point is past the target) is refined by sampling
//! bridge midpoints down to `dt / 2^refine_levels`; at that scale the bridge
//! probability decides the crossing. Hit times are therefore exact in law up
//! to the finest sub-step.
//!
//! In the open population every searcher is independent given its birth time,
//! so searchers are simulated one after another in birth order, each for its
//! exponential lifetime or until the best hit so far, whichever comes first.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::check_dt;
use super::rng::RngSpec;
use crate::error::{invalid, Error, Result};
use crate::passage::FirstPassageSetup;

/// Bridge crossing probability above which a step is refined.
const REFINE_THRESHOLD: f64 = 1e-4;

/// Crossing probabilities below `e^{-40}` are treated as zero.
const NEGLIGIBLE_EXPONENT: f64 = 40.0;

/// Default cap on path steps per run.
pub const DEFAULT_EVENT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FptSample {
    pub hit_time: f64,
    /// Recruits (open population) or resets (resetting) before the hit.
    pub n_entries_used: u64,
    /// Index of the searcher that hit; 0 is the initial one.
    pub generation: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FptConfig {
    pub dt: f64,
    pub event_budget: u64,
    pub refine_levels: u32,
}

impl FptConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, event_budget: DEFAULT_EVENT_BUDGET, refine_levels: 8 }
    }
}

struct Walker<'a> {
    target: f64,
    drift: f64,
    sigma: f64,
    dt: f64,
    h_min: f64,
    budget: u64,
    steps: u64,
    rng: &'a mut ChaCha8Rng,
}

impl Walker<'_> {
    fn new<'a>(s: &FirstPassageSetup, cfg: &FptConfig, rng: &'a mut ChaCha8Rng) -> Walker<'a> {
        Walker {
            target: s.distance(),
            drift: s.params().mu_bar(),
            sigma: s.params().sigma(),
            dt: cfg.dt,
            h_min: cfg.dt / f64::from(1u32 << cfg.refine_levels.min(30)),
            budget: cfg.event_budget,
            steps: 0,
            rng,
        }
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `−log` of the bridge crossing probability.
    fn bridge_exponent(&self, y1: f64, y2: f64, h: f64) -> f64 {
        2.0 * (self.target - y1) * (self.target - y2) / (self.sigma * self.sigma * h)
    }

    /// First hit inside `[t0, t0 + h]` given end points `y1 < L` and `y2`.
    fn resolve(&mut self, t0: f64, y1: f64, h: f64, y2: f64) -> Option<f64> {
        let past = y2 >= self.target;
        let exponent = if past { 0.0 } else { self.bridge_exponent(y1, y2, h) };
        if exponent > NEGLIGIBLE_EXPONENT {
            return None;
        }
        let p = (-exponent).exp();
        if (past || p > REFINE_THRESHOLD) && h > self.h_min {
            let half = 0.5 * h;
            let ym = 0.5 * (y1 + y2) + 0.5 * self.sigma * h.sqrt() * self.normal();
            if ym >= self.target {
                return self.resolve(t0, y1, half, ym).or(Some(t0 + half));
            }
            return self.resolve(t0, y1, half, ym).or_else(|| self.resolve(t0 + half, ym, half, y2));
        }
        if past {
            return Some(t0 + h * (self.target - y1) / (y2 - y1));
        }
        (self.rng.random::<f64>() < p).then_some(t0 + 0.5 * h)
    }

    /// Walk from `y = 0` at `start` until `horizon`; returns the hit time if any.
    fn walk(&mut self, start: f64, horizon: f64) -> Result<Option<f64>> {
        let mut t = start;
        let mut y = 0.0;
        while t < horizon {
            let h = self.dt.min(horizon - t);
            let y2 = y + self.drift * h + self.sigma * h.sqrt() * self.normal();
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::EventBudget { budget: self.budget, time: t });
            }
            if let Some(hit) = self.resolve(t, y, h, y2) {
                return Ok(Some(hit));
            }
            y = y2;
            t += h;
        }
        Ok(None)
    }
}

fn check_config(cfg: &FptConfig, rates: &[f64]) -> Result<()> {
    check_dt(rates, cfg.dt)?;
    if cfg.event_budget == 0 {
        return invalid("event budget must be positive");
    }
    Ok(())
}

fn model_rates(s: &FirstPassageSetup) -> [f64; 2] {
    [s.params().mu(), s.params().sigma2()]
}

/// First hit of the open population: one searcher at `t = 0`, recruits at
/// rate `lambda_r`, each dying at rate `lambda_m`.
pub fn simulate_fpt_open(s: &FirstPassageSetup, lambda_r: f64, lambda_m: f64, cfg: &FptConfig, rng: RngSpec) -> Result<FptSample> {
    if !(lambda_r > 0.0 && lambda_r.is_finite()) {
        return invalid("lambda_r must be positive for the search to terminate");
    }
    if !(lambda_m >= 0.0 && lambda_m.is_finite()) {
        return invalid("lambda_m must be finite and nonnegative");
    }
    let [mu, s2] = model_rates(s);
    check_config(cfg, &[lambda_r, lambda_m, mu, s2])?;
    let mut rng = rng.rng();
    let gaps = Exp::new(lambda_r).expect("positive rate");
    let life = (lambda_m > 0.0).then(|| Exp::new(lambda_m).expect("positive rate"));
    let mut best = f64::INFINITY;
    let mut winner = 0;
    let mut born = 0.0;
    let mut searcher = 0u64;
    let mut steps = 0;
    loop {
        let lifetime = life.as_ref().map_or(f64::INFINITY, |d| d.sample(&mut rng));
        let horizon = (born + lifetime).min(best);
        let mut w = Walker::new(s, cfg, &mut rng);
        w.budget = cfg.event_budget - steps;
        let hit = w.walk(born, horizon)?;
        steps += w.steps;
        if let Some(h) = hit {
            if h < best {
                best = h;
                winner = searcher;
            }
        }
        born += gaps.sample(&mut rng);
        if born >= best {
            return Ok(FptSample { hit_time: best, n_entries_used: searcher, generation: winner });
        }
        searcher += 1;
    }
}

/// First hit of one searcher reset to `x0` at rate `r` (`r = 0`: no resets).
pub fn simulate_fpt_reset(s: &FirstPassageSetup, r: f64, cfg: &FptConfig, rng: RngSpec) -> Result<FptSample> {
    if !(r >= 0.0 && r.is_finite()) {
        return invalid("r must be finite and nonnegative");
    }
    let [mu, s2] = model_rates(s);
    check_config(cfg, &[r, mu, s2])?;
    let mut rng = rng.rng();
    let epochs = (r > 0.0).then(|| Exp::new(r).expect("positive rate"));
    let mut t = 0.0;
    let mut resets = 0;
    let mut steps = 0;
    loop {
        let horizon = t + epochs.as_ref().map_or(f64::INFINITY, |e| e.sample(&mut rng));
        let mut w = Walker::new(s, cfg, &mut rng);
        w.budget = cfg.event_budget - steps;
        let hit = w.walk(t, horizon)?;
        steps += w.steps;
        if let Some(h) = hit {
            return Ok(FptSample { hit_time: h, n_entries_used: resets, generation: resets });
        }
        t = horizon;
        resets += 1;
    }
}

/// `runs` open-population samples on child streams of `rng`, in run order.
pub fn simulate_fpt_open_batch(
    s: &FirstPassageSetup,
    lambda_r: f64,
    lambda_m: f64,
    cfg: &FptConfig,
    runs: usize,
    rng: RngSpec,
) -> Result<Vec<FptSample>> {
    (0..runs as u64).into_par_iter().map(|i| simulate_fpt_open(s, lambda_r, lambda_m, cfg, rng.child(i))).collect()
}

/// `runs` resetting samples on child streams of `rng`, in run order.
pub fn simulate_fpt_reset_batch(s: &FirstPassageSetup, r: f64, cfg: &FptConfig, runs: usize, rng: RngSpec) -> Result<Vec<FptSample>> {
    (0..runs as u64).into_par_iter().map(|i| simulate_fpt_reset(s, r, cfg, rng.child(i))).collect()
}
