//! Triangle counting and transitivity estimation over dynamic graph streams.
//!
//! The estimator combines a frequency-moment sketch for the number of
//! 2-paths with monochromatic sparsification and uniform 2-path sampling
//! for the transitivity coefficient. Exact oracles and a Doulion baseline
//! are included for verification.

pub mod baselines;
pub mod estimator;
pub mod f2_sketch;
pub mod generate;
pub mod hashing;
pub mod indep_paths;
pub mod oracles;
pub mod sparsifier;
pub mod stream;
pub mod two_path;

pub use estimator::{derive_config, run, EstimatorConfig, EstimatorError, EstimatorParams, Report, TriangleEstimator};
pub use stream::{AdjacencyGraph, EdgeEvent, Sign, StreamConfig, StreamError, VertexId};

/// `⌈x⌉`, ignoring floating-point noise just above an integer.
pub(crate) fn ceil_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}
