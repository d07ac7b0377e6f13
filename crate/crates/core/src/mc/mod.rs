//! Monte Carlo oracles. Every simulator takes an [`RngSpec`]; batch helpers
//! give run `i` the child stream `i` and return results in run order, so
//! output does not depend on the number of worker threads.

mod ensemble;
mod passage;
mod population;
mod rng;
mod stats;

pub use ensemble::{simulate_ensemble, simulate_ensemble_batch, simulate_ensemble_stepped, EnsembleState, DT_STABILITY};
pub use passage::{
    simulate_fpt_open, simulate_fpt_open_batch, simulate_fpt_reset, simulate_fpt_reset_batch, FptConfig, FptSample, DEFAULT_EVENT_BUDGET,
};
pub use population::{gillespie_batch, gillespie_population};
pub use rng::{mix64, RngSpec};
pub use stats::{
    chi_square_test, estimate_density, histogram_counts, histogram_density, kolmogorov_q, ks_test, ks_test_sorted, mean_estimate,
    ratio_estimate, ChiSquareResult, Estimate, KsResult,
};
