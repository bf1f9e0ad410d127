//! Shared fixtures for the solver benchmarks.

use mtdhg_core::harness::{derive_instance_seed, generate_instance, ExperimentConfig};
use mtdhg_core::GameInstance;

/// Deterministic benchmark instance of the given shape.
pub fn fixture(n: usize, k: usize, index: usize) -> GameInstance {
    let cfg = ExperimentConfig::default();
    let seed = derive_instance_seed(0xbe7c, n, k, index);
    generate_instance(seed, n, k, &cfg)
        .expect("fixture generates")
        .instance
}
