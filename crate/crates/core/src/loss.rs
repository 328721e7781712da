//! The random Hellinger distance, the robust test functional `T`, the
//! per-cube score used by the selection rule, and risks of an estimate
//! against a known transition density.
//!
//! For two functions constant on a cube `S` with values `a` and `b`, every
//! quantity reduces to closed form in the pyramid statistics of `S`:
//! `w_S = P_{I_S} μ(J_S)` and `N_S`.

use std::f64::consts::SQRT_2;

use crate::partition::{intersect, locate, DyadicCube};
use crate::quad::{QuadSpec, Quadrature};
use crate::stats::{HistogramEstimate, Sample, StatsPyramid};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// `(1 - 1/√2) / 2`.
pub const ALPHA: f64 = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0;

/// Penalty constant `L` and sample size `n`; the penalty of a partition with
/// `k` cells is `k · L log(n) / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    l: f64,
    n: usize,
}

impl PenaltyConfig {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!(
                "penalty constant L = {l} must be positive"
            )));
        }
        if n < 2 {
            return Err(Error::Config(format!(
                "penalty needs n >= 2 transitions, got {n}"
            )));
        }
        Ok(PenaltyConfig { l, n })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        ALPHA
    }

    /// Penalty charged per cell, `L log(n) / n`.
    pub fn leaf_weight(&self) -> f64 {
        self.l * (self.n as f64).ln() / self.n as f64
    }

    pub fn pen(&self, cells: usize) -> f64 {
        cells as f64 * self.leaf_weight()
    }
}

/// Two constants `a`, `b` compared on a cube `S` with occupancy mass
/// `mass = P_{I_S} μ(J_S)` and `transitions = N_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPairScore {
    pub a: f64,
    pub b: f64,
    pub mass: f64,
    pub transitions: f64,
}

impl CellPairScore {
    pub fn on_cube(a: f64, b: f64, s: &DyadicCube, stats: &StatsPyramid) -> Self {
        CellPairScore {
            a,
            b,
            mass: stats.mass(s),
            transitions: stats.transitions(s) as f64,
        }
    }

    pub fn swapped(&self) -> Self {
        CellPairScore {
            a: self.b,
            b: self.a,
            ..*self
        }
    }
}

/// `H²(a·1_S, b·1_S) = (√a − √b)² w_S / (2n)`.
#[inline]
pub fn hellinger2_cells(score: &CellPairScore, n: usize) -> f64 {
    let d = score.a.sqrt() - score.b.sqrt();
    d * d * score.mass / (2.0 * n as f64)
}

/// `T(a·1_S, b·1_S)`, the sum of the integral term, the empirical ratio
/// term and the mass term. All three vanish when `a = b = 0`.
#[inline]
pub fn test_t_cells(score: &CellPairScore, n: usize) -> f64 {
    let sum = score.a + score.b;
    if sum == 0.0 {
        return 0.0;
    }
    let n = n as f64;
    let root = sum.sqrt();
    let diff = score.b.sqrt() - score.a.sqrt();
    let integral = score.mass * root * diff / (2.0 * n * SQRT_2);
    let ratio = score.transitions * diff / (root * n * SQRT_2);
    let mass = score.mass * (score.a - score.b) / (2.0 * n);
    integral + ratio + mass
}

/// `F_K(K') = α H² + T` between `ŝ_K 1_{K'}` and `ŝ_{K'} 1_K`; zero for
/// disjoint cubes.
pub fn score_fk(
    k: &DyadicCube,
    k2: &DyadicCube,
    stats: &StatsPyramid,
    config: &PenaltyConfig,
) -> f64 {
    match intersect(k, k2) {
        None => 0.0,
        Some(s) => {
            let score =
                CellPairScore::on_cube(stats.cell_value(k), stats.cell_value(k2), &s, stats);
            ALPHA * hellinger2_cells(&score, config.n()) + test_t_cells(&score, config.n())
        }
    }
}

fn pairwise(
    f: &HistogramEstimate,
    g: &HistogramEstimate,
    stats: &StatsPyramid,
    term: impl Fn(&CellPairScore) -> f64,
) -> f64 {
    let mut acc = CompensatedSum::default();
    for (kf, a) in f.partition().cells().iter().zip(f.values()) {
        for (kg, b) in g.partition().cells().iter().zip(g.values()) {
            if let Some(s) = intersect(kf, kg) {
                acc.add(term(&CellPairScore::on_cube(*a, *b, &s, stats)));
            }
        }
    }
    acc.value()
}

/// `H²(f, g)` for two piecewise-constant functions whose cells are covered
/// by the pyramid.
pub fn hellinger2_between(
    f: &HistogramEstimate,
    g: &HistogramEstimate,
    stats: &StatsPyramid,
) -> f64 {
    pairwise(f, g, stats, |s| hellinger2_cells(s, stats.n()))
}

/// `T(f, g)` for two piecewise-constant functions whose cells are covered by
/// the pyramid.
pub fn test_between(f: &HistogramEstimate, g: &HistogramEstimate, stats: &StatsPyramid) -> f64 {
    pairwise(f, g, stats, |s| test_t_cells(s, stats.n()))
}

/// A known transition density `s(x, y)` of a chain on `R`.
pub trait TransitionDensity: Sync {
    fn density(&self, x: f64, y: f64) -> f64;

    /// Points where `y ↦ s(x, y)` fails to be smooth.
    fn breakpoints(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> TransitionDensity for F {
    fn density(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

impl TransitionDensity for HistogramEstimate {
    fn density(&self, x: f64, y: f64) -> f64 {
        self.evaluate(&[x], &[y])
    }

    fn breakpoints(&self, _x: f64) -> Vec<f64> {
        let side = 1u64 << self.partition().max_level();
        (1..side).map(|k| k as f64 / side as f64).collect()
    }
}

fn check_one_dimensional(est: &HistogramEstimate, sample: &Sample) -> Result<()> {
    if sample.d() != 1 || est.partition().dim() != 2 {
        return Err(Error::InvalidInput(
            "risks against a known density are computed for d = 1 only".into(),
        ));
    }
    Ok(())
}

fn risk_sum(
    truth: &dyn TransitionDensity,
    est: &HistogramEstimate,
    sample: &Sample,
    quad: &QuadSpec,
    integrand: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    check_one_dimensional(est, sample)?;
    let q = Quadrature::new(*quad)?;
    let mut acc = CompensatedSum::default();
    for i in 0..sample.n() {
        let x = sample.point(i)[0];
        if !(0.0..=1.0).contains(&x) {
            continue;
        }
        let breaks = truth.breakpoints(x);
        for (k, &a) in est.partition().cells().iter().zip(est.values()) {
            let ix = k.interval(0);
            if !ix.contains(x) {
                continue;
            }
            let iy = k.interval(1);
            let v = q.integrate(
                |y| [integrand(truth.density(x, y), a)],
                iy.lower(),
                iy.upper(),
                &breaks,
            );
            acc.add(v[0]);
        }
    }
    Ok(acc.value())
}

/// `H²(s 1_A, ŝ) = (1/2n) Σ_i ∫_0^1 (√s(X_i,y) − √ŝ(X_i,y))² dy`, integrating
/// cell by cell. Points `X_i` outside `[0,1]` contribute nothing.
pub fn hellinger2_vs_truth(
    truth: &dyn TransitionDensity,
    est: &HistogramEstimate,
    sample: &Sample,
    quad: &QuadSpec,
) -> Result<f64> {
    let total = risk_sum(truth, est, sample, quad, |s, a| {
        let d = s.sqrt() - a.sqrt();
        d * d
    })?;
    Ok(total / (2.0 * sample.n() as f64))
}

/// `‖s 1_A − ŝ‖_n² = (1/n) Σ_i ∫_0^1 (s(X_i,y) − ŝ(X_i,y))² dy`.
pub fn empirical_l2(
    truth: &dyn TransitionDensity,
    est: &HistogramEstimate,
    sample: &Sample,
    quad: &QuadSpec,
) -> Result<f64> {
    let total = risk_sum(truth, est, sample, quad, |s, a| (s - a) * (s - a))?;
    Ok(total / sample.n() as f64)
}

/// Per-cube sums of `∫_{J_K} s`, `∫_{J_K} √s` and `∫_{J_K} s²` over the
/// points `X_i ∈ I_K`, for every cube up to `max_level` (d = 1).
///
/// Since both risks expand into these moments, the risk of any histogram on
/// any partition in `M_ℓ` is additive over cells, which is what makes the
/// true-risk oracle a tree dynamic program.
#[derive(Debug, Clone)]
pub struct TruthIntegrals {
    n: usize,
    max_level: u32,
    sums: Vec<Vec<[f64; 3]>>,
}

impl TruthIntegrals {
    pub fn build(
        truth: &dyn TransitionDensity,
        sample: &Sample,
        max_level: u32,
        quad: &QuadSpec,
    ) -> Result<Self> {
        if sample.d() != 1 {
            return Err(Error::InvalidInput(
                "truth integrals are computed for d = 1 only".into(),
            ));
        }
        if max_level > 12 {
            return Err(Error::Capacity(format!(
                "truth integrals beyond level 12 requested ({max_level})"
            )));
        }
        let q = Quadrature::new(*quad)?;
        let side = 1usize << max_level;
        let mut sums: Vec<Vec<[f64; 3]>> = (0..=max_level)
            .map(|j| vec![[0.0; 3]; 1usize << (2 * j)])
            .collect();
        let top = &mut sums[max_level as usize];
        for i in 0..sample.n() {
            let x = sample.point(i)[0];
            let Some(ix) = locate(x, max_level) else {
                continue;
            };
            let breaks = truth.breakpoints(x);
            for r in 0..side {
                let lo = r as f64 / side as f64;
                let hi = (r + 1) as f64 / side as f64;
                let v = q.integrate(
                    |y| {
                        let s = truth.density(x, y);
                        [s, s.sqrt(), s * s]
                    },
                    lo,
                    hi,
                    &breaks,
                );
                let cell = &mut top[ix as usize * side + r];
                for k in 0..3 {
                    cell[k] += v[k];
                }
            }
        }
        for j in (0..max_level).rev() {
            let (coarse, fine) = sums.split_at_mut(j as usize + 1);
            for (code, v) in fine[0].iter().enumerate() {
                let parent = DyadicCube::from_code(2, j + 1, code as u64).ancestor(j);
                let slot = &mut coarse[j as usize][parent.code() as usize];
                for k in 0..3 {
                    slot[k] += v[k];
                }
            }
        }
        Ok(TruthIntegrals {
            n: sample.n(),
            max_level,
            sums,
        })
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// `[Σ ∫ s, Σ ∫ √s, Σ ∫ s²]` on cube `k`.
    pub fn moments(&self, k: &DyadicCube) -> [f64; 3] {
        assert!(k.dim() == 2 && k.level() <= self.max_level);
        self.sums[k.level() as usize][k.code() as usize]
    }

    /// Contribution of cube `k` with histogram value `a` to `H²(s 1_A, ŝ)`.
    pub fn h2_cell(&self, k: &DyadicCube, a: f64, stats: &StatsPyramid) -> f64 {
        let [s1, sq, _] = self.moments(k);
        (s1 - 2.0 * a.sqrt() * sq + a * stats.mass(k)) / (2.0 * self.n as f64)
    }

    /// Contribution of cube `k` with histogram value `a` to `‖s 1_A − ŝ‖_n²`.
    pub fn l2_cell(&self, k: &DyadicCube, a: f64, stats: &StatsPyramid) -> f64 {
        let [s1, _, s2] = self.moments(k);
        (s2 - 2.0 * a * s1 + a * a * stats.mass(k)) / self.n as f64
    }
}
