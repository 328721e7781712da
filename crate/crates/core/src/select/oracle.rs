//! The true-risk oracle `ŝ⁽⁰⁾`: the histogram on the partition of `M_ℓ`
//! that minimizes `H²(s 1_A, ŝ_m)` when `s` is known.

use std::time::Instant;

use crate::loss::{TransitionDensity, TruthIntegrals};
use crate::partition::{DyadicCube, Partition};
use crate::quad::QuadSpec;
use crate::stats::{estimate, Sample, StatsPyramid};
use crate::{Error, Result};

use super::{min_tree, tree_cost, Diagnostics, SelectionResult};

/// Which risk [`risk_of_partition`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Risk {
    /// `H²(s 1_A, ŝ_m)`.
    Hellinger,
    /// `‖s 1_A − ŝ_m‖_n²`.
    L2,
}

fn cell_cost(risk: Risk, k: &DyadicCube, stats: &StatsPyramid, integrals: &TruthIntegrals) -> f64 {
    let a = stats.cell_value(k);
    match risk {
        Risk::Hellinger => integrals.h2_cell(k, a, stats),
        Risk::L2 => integrals.l2_cell(k, a, stats),
    }
}

/// Risk of the histogram `ŝ_m` summed in split-tree order, the same order
/// the oracle minimizes in. Comparing a selected partition against the
/// oracle through this function can therefore never show the oracle worse.
pub fn risk_of_partition(
    m: &Partition,
    stats: &StatsPyramid,
    integrals: &TruthIntegrals,
    risk: Risk,
) -> f64 {
    tree_cost(&m.to_tree(), &|k: &DyadicCube| {
        cell_cost(risk, k, stats, integrals)
    })
}

/// Oracle selection from a pyramid and precomputed truth moments.
/// `criterion` holds the oracle's Hellinger risk.
pub fn oracle_select_with(
    stats: &StatsPyramid,
    integrals: &TruthIntegrals,
    level: u32,
) -> Result<SelectionResult> {
    if level > stats.max_level() || level > integrals.max_level() {
        return Err(Error::InvalidInput(format!(
            "oracle depth {level} exceeds the available statistics"
        )));
    }
    let start = Instant::now();
    let dim = stats.dim();
    let costs: Vec<Vec<f64>> = (0..=level)
        .map(|j| {
            (0..1u64 << (j as usize * dim))
                .map(|code| {
                    cell_cost(
                        Risk::Hellinger,
                        &DyadicCube::from_code(dim, j, code),
                        stats,
                        integrals,
                    )
                })
                .collect()
        })
        .collect();
    let (risk, tree, outer_visits) = min_tree(dim, &costs);
    let partition = tree.to_partition()?;
    let estimate = estimate(&partition, stats)?;
    Ok(SelectionResult {
        partition,
        criterion: risk,
        estimate,
        level,
        diagnostics: Diagnostics {
            outer_visits,
            elapsed_secs: start.elapsed().as_secs_f64(),
            ..Default::default()
        },
    })
}

/// `ŝ⁽⁰⁾ = argmin_{m ∈ M_ℓ} H²(s 1_A, ŝ_m)` for a known density (d = 1).
pub fn oracle_select(
    truth: &dyn TransitionDensity,
    sample: &Sample,
    level: u32,
    quad: &QuadSpec,
) -> Result<SelectionResult> {
    let stats = StatsPyramid::bin(sample, level)?;
    let integrals = TruthIntegrals::build(truth, sample, level, quad)?;
    oracle_select_with(&stats, &integrals, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::hellinger2_vs_truth;
    use crate::partition::enumerate_partitions;

    fn truth(x: f64, y: f64) -> f64 {
        1.0 + 0.6 * (std::f64::consts::PI * (2.0 * y + x)).sin() * (1.0 - 0.5 * x)
    }

    #[test]
    fn oracle_matches_enumeration() {
        let pts = vec![
            0.11, 0.52, 0.73, 0.24, 0.95, 0.38, 0.61, 0.07, 0.84, 0.46, 0.29, 0.68, 0.5,
        ];
        let sample = Sample::from_scalars(pts).unwrap();
        let quad = QuadSpec::default();
        let r = oracle_select(&truth, &sample, 2, &quad).unwrap();
        let stats = StatsPyramid::bin(&sample, 2).unwrap();
        let mut best = f64::INFINITY;
        for m in enumerate_partitions(2, 1).unwrap() {
            let est = estimate(&m, &stats).unwrap();
            best = best.min(hellinger2_vs_truth(&truth, &est, &sample, &quad).unwrap());
        }
        assert!(
            (r.criterion - best).abs() < 1e-10,
            "{} vs {best}",
            r.criterion
        );
        let direct = hellinger2_vs_truth(&truth, &r.estimate, &sample, &quad).unwrap();
        assert!((direct - r.criterion).abs() < 1e-10);
    }

    #[test]
    fn oracle_is_never_beaten_in_tree_order() {
        let pts: Vec<f64> = (0..200)
            .map(|i| ((i as f64) * 0.618_033_988_75).fract())
            .collect();
        let sample = Sample::from_scalars(pts).unwrap();
        let stats = StatsPyramid::bin(&sample, 3).unwrap();
        let integrals = TruthIntegrals::build(&truth, &sample, 3, &QuadSpec::default()).unwrap();
        let oracle = oracle_select_with(&stats, &integrals, 3).unwrap();
        assert_eq!(
            risk_of_partition(&oracle.partition, &stats, &integrals, Risk::Hellinger).to_bits(),
            oracle.criterion.to_bits()
        );
        for m in enumerate_partitions(2, 1).unwrap() {
            assert!(risk_of_partition(&m, &stats, &integrals, Risk::Hellinger) >= oracle.criterion);
        }
        let grid = Partition::regular(2, 3).unwrap();
        assert!(risk_of_partition(&grid, &stats, &integrals, Risk::Hellinger) >= oracle.criterion);
    }

    /// Transition density constant on the four level-1 cells.
    fn block_truth(x: f64, y: f64) -> f64 {
        const V: [[f64; 2]; 2] = [[1.6, 0.4], [0.6, 1.4]];
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return 0.0;
        }
        V[(x >= 0.5) as usize][(y >= 0.5) as usize]
    }

    fn block_chain(n: usize, seed: u64) -> Sample {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x: f64 = 0.3;
        let mut pts = vec![x];
        for _ in 0..n {
            let low = rng.random::<f64>() < 0.5 * block_truth(x, 0.0);
            let u: f64 = rng.random();
            x = if low { 0.5 * u } else { 0.5 + 0.5 * u };
            pts.push(x);
        }
        Sample::from_scalars(pts).unwrap()
    }

    #[test]
    fn oracle_risk_vanishes_for_a_block_density() {
        let quad = QuadSpec::default();
        let risk = |n: usize| {
            let sample = block_chain(n, 17);
            let r = oracle_select(&block_truth, &sample, 4, &quad).unwrap();
            let stats = StatsPyramid::bin(&sample, 4).unwrap();
            let grid = estimate(&Partition::regular(2, 1).unwrap(), &stats).unwrap();
            let grid_risk = hellinger2_vs_truth(&block_truth, &grid, &sample, &quad).unwrap();
            assert!(r.criterion <= grid_risk + 1e-12);
            r.criterion
        };
        let small = risk(200);
        let large = risk(20_000);
        assert!(large < small, "{large} vs {small}");
        assert!(large < 1e-3, "{large}");
    }
}
