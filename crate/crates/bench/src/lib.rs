//! Shared inputs for the criterion benchmarks.

use mctd_core::sim::{simulate, ChainSpec, Example};
use mctd_core::Sample;

/// A trajectory of the first example chain with `n` transitions.
pub fn ar_chain(n: usize, seed: u64) -> Sample {
    simulate(&ChainSpec::new(Example::Ar), n, seed).expect("n > 0")
}
