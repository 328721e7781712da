//! The seven example chains `X_{k+1} = F(X_k, U_k)`, their transition
//! densities, and the Monte-Carlo experiment runner.

mod density;
mod experiment;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::stats::Sample;
use crate::{Error, Result};

pub use density::true_density;
pub use experiment::{
    run_experiment, ExperimentConfig, RiskReport, RiskRow, SummaryRow, QUANTILE_LEVELS,
};

/// Burn-in used for the chains that are simulated close to stationarity.
pub const DEFAULT_BURN_IN: usize = 10_000;

/// Start value of every chain.
pub const DEFAULT_X0: f64 = 0.5;

/// The example chains, numbered 1 to 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    /// 1: `X' = X/2 + (1 + U)/4`, `U ~ N(0, 1)`.
    Ar,
    /// 2: `X' = (6 + sin(12X − 6) + (cos(X − 6) + 3) U) / 12`.
    Arch,
    /// 3: `X' = (X + 1)/3 + σ(X) U` with a β-density bump in `σ`.
    BetaScale,
    /// 4: `X' = (g(X) + 1)/4 + U/8` with `g` a sum of two Gaussian bumps.
    TwoBump,
    /// 5: as 1 with `U ~ N(0, 1/2)`.
    ArNarrow,
    /// 6: `X' = (X + U)/2` with `U` an equal mixture of `N(0, 0.01)` and
    /// `N(1, 0.01)`.
    Bimodal,
    /// 7: `X' = X/(50X + 1) + X U`, `U ~ Exp(1)`.
    ExpJump,
}

impl Example {
    pub const ALL: [Example; 7] = [
        Example::Ar,
        Example::Arch,
        Example::BetaScale,
        Example::TwoBump,
        Example::ArNarrow,
        Example::Bimodal,
        Example::ExpJump,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1..=7 => Ok(Self::ALL[id as usize - 1]),
            _ => Err(Error::Config(format!(
                "unknown example id {id}, expected 1 to 7"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        Self::ALL.iter().position(|e| *e == self).unwrap() as u8 + 1
    }

    /// Default burn-in: the first four chains are run close to
    /// stationarity, the others are observed from their start value.
    pub fn default_burn_in(self) -> usize {
        if self.id() <= 4 {
            DEFAULT_BURN_IN
        } else {
            0
        }
    }

    /// One step of the chain.
    pub fn step(self, x: f64, rng: &mut impl Rng) -> f64 {
        match self {
            Example::Ar => {
                let u: f64 = rng.sample(StandardNormal);
                0.5 * x + (1.0 + u) / 4.0
            }
            Example::Arch => {
                let u: f64 = rng.sample(StandardNormal);
                (6.0 + (12.0 * x - 6.0).sin() + ((x - 6.0).cos() + 3.0) * u) / 12.0
            }
            Example::BetaScale => {
                let u: f64 = rng.sample(StandardNormal);
                (x + 1.0) / 3.0 + density::beta_scale_sd(x) * u
            }
            Example::TwoBump => {
                let u: f64 = rng.sample(StandardNormal);
                (density::two_bump_g(x) + 1.0) / 4.0 + u / 8.0
            }
            Example::ArNarrow => {
                let u: f64 = rng.sample(StandardNormal);
                0.5 * x + (1.0 + std::f64::consts::FRAC_1_SQRT_2 * u) / 4.0
            }
            Example::Bimodal => {
                let z: f64 = rng.sample(StandardNormal);
                let u = if rng.random::<bool>() { 1.0 } else { 0.0 } + 0.1 * z;
                0.5 * (x + u)
            }
            Example::ExpJump => {
                let u: f64 = rng.sample(Exp1);
                x / (50.0 * x + 1.0) + x * u
            }
        }
    }
}

/// A chain to simulate: the example, the number of discarded initial steps
/// and the start value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub example: Example,
    pub burn_in: usize,
    pub x0: f64,
}

impl ChainSpec {
    pub fn new(example: Example) -> Self {
        ChainSpec {
            example,
            burn_in: example.default_burn_in(),
            x0: DEFAULT_X0,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }
}

/// `X_p, …, X_{p+n}` of the chain with a ChaCha8 stream seeded by `seed`.
pub fn simulate(spec: &ChainSpec, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidInput("simulate needs n >= 1".into()));
    }
    if !spec.x0.is_finite() {
        return Err(Error::Config(format!(
            "start value {} is not finite",
            spec.x0
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = spec.x0;
    for _ in 0..spec.burn_in {
        x = spec.example.step(x, &mut rng);
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push(x);
    for _ in 0..n {
        x = spec.example.step(x, &mut rng);
        points.push(x);
    }
    Sample::from_scalars(points)
}
