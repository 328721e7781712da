//! Estimation of the transition density of a homogeneous Markov chain.
//!
//! The estimator is a histogram on a data-driven partition of `[0,1]^{2d}`
//! into dyadic cubes. Candidate partitions are those produced by recursively
//! splitting cubes into their `4^d` dyadic children, at most `ℓ` times. The
//! partition is chosen by minimizing a penalized criterion built from a robust
//! test statistic and a random Hellinger distance; the minimization is exact
//! and runs in `O(nℓd + ℓ·4^{(ℓ+1)d})` operations through two nested tree
//! dynamic programs.
//!
//! ```
//! use mctd_core::sim::{simulate, ChainSpec, Example};
//! use mctd_core::select::select;
//!
//! let sample = simulate(&ChainSpec::new(Example::Ar), 500, 7).unwrap();
//! let result = select(&sample, 0.03, 4).unwrap();
//! assert!(result.estimate.values().iter().all(|v| *v >= 0.0));
//! ```
//!
//! Module map:
//!
//! - [`partition`]: dyadic cubes, partitions and split trees.
//! - [`stats`]: binning a chain into transition/occupancy counts and the
//!   histogram estimator.
//! - [`loss`]: Hellinger distance, the test functional and risks against a
//!   known density.
//! - [`quad`]: adaptive composite Gauss–Legendre quadrature.
//! - [`select`]: the selection rule, the true-risk oracle and the
//!   finite-dictionary selector.
//! - [`sim`]: the example chains and the Monte-Carlo experiment runner.

mod error;
mod sum;

pub mod loss;
pub mod partition;
pub mod quad;
pub mod select;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use loss::{PenaltyConfig, TransitionDensity};
pub use partition::{DyadicCube, DyadicInterval, Partition, PartitionTree};
pub use quad::QuadSpec;
pub use select::{select, SelectionResult};
pub use stats::{HistogramEstimate, Sample, StatsPyramid};
