//! Shared fixtures for the benchmark suite.
//!
//! Benchmarks operate on seeded synthetic instances so timings are
//! comparable across runs and machines; this crate only hosts the data
//! helpers the `benches/` targets share.

use stabcv_core::{generate, Result, SynthConfig, SynthInstance};

/// A standardized synthetic instance with fixed correlation and SNR, so
/// benchmark inputs depend only on the shape and seed.
pub fn instance(n: usize, p: usize, seed: u64) -> Result<SynthInstance> {
    generate(&SynthConfig {
        n,
        p,
        tau_true: p.min(5),
        rho: 0.3,
        nu: 1.0,
        n_test: 10,
        seed,
    })
}
