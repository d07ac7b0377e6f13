//! Parameter sets shared by the benchmarks.

use gbmflow_core::{FirstPassageSetup, ModelParams};

/// Saturating-moment ensemble with fast entry.
pub fn saturating() -> ModelParams {
    ModelParams::new(0.1, 0.02f64.sqrt(), 2.0, 100.0, 0.5).expect("valid parameters")
}

/// Searcher at 2 aiming for 3.
pub fn searcher() -> FirstPassageSetup {
    let p = ModelParams::new(0.05, 0.02f64.sqrt(), 2.0, 0.0, 0.0).expect("valid parameters");
    FirstPassageSetup::new(p, 3.0).expect("target above x0")
}
