//! Exact birth–death population counts (Gillespie): `n → n+1` at rate `λr`,
//! `n → n−1` at rate `n λm`, starting from one unit.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use super::rng::RngSpec;
use crate::error::{invalid, Result};
use crate::params::{ModelParams, TimeSeries};

/// Population size at each checkpoint of one exact trajectory.
pub fn gillespie_population(p: &ModelParams, checkpoints: &[f64], rng: RngSpec) -> Result<TimeSeries> {
    if checkpoints.is_empty() {
        return invalid("at least one checkpoint is required");
    }
    if checkpoints.iter().any(|&t| !(t >= 0.0 && t.is_finite())) || checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return invalid("checkpoints must be finite, nonnegative and nondecreasing");
    }
    let mut rng = rng.rng();
    let (lr, lm) = (p.lambda_r(), p.lambda_m());
    let mut n: u64 = 1;
    let mut t = 0.0;
    let mut counts = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        loop {
            let total = lr + n as f64 * lm;
            if total <= 0.0 {
                break;
            }
            let e: f64 = Exp1.sample(&mut rng);
            let next = t + e / total;
            if next > c {
                // memoryless: the pending event is redrawn after the checkpoint
                break;
            }
            t = next;
            if rng.random::<f64>() * total < lr {
                n += 1;
            } else {
                n -= 1;
            }
        }
        t = t.max(c);
        counts.push(n as f64);
    }
    TimeSeries::new(checkpoints.to_vec(), counts)
}

/// `runs` trajectories on child streams of `rng`, in run order.
pub fn gillespie_batch(p: &ModelParams, checkpoints: &[f64], runs: usize, rng: RngSpec) -> Result<Vec<TimeSeries>> {
    (0..runs as u64).into_par_iter().map(|i| gillespie_population(p, checkpoints, rng.child(i))).collect()
}
