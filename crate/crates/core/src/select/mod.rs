//! The penalized selection rule over `M_ℓ`.
//!
//! `γ(m) = Σ_{K∈m} SUP_K + 2 pen(m)` where
//! `SUP_K = sup_{m'∈M_ℓ} Σ_{K'∈m'} F_K(K') − pen(m' ∨ K)`.
//!
//! Each `SUP_K` is a maximization over split trees that is additive over
//! subtrees ([`Selector::inner_sup`]); the outer minimization of `γ` is a
//! second, cheaper tree program over the table of `SUP_K`. Both are exact,
//! ties resolve toward the coarser tree.

mod dictionary;
mod direct;
mod inner;
mod oracle;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::loss::PenaltyConfig;
use crate::partition::{DyadicCube, Partition, PartitionTree};
use crate::stats::{estimate, HistogramEstimate, Sample, StatsPyramid};
use crate::{Error, Result};

pub use dictionary::{dictionary_select, Dictionary, DictionarySelection};
pub use direct::{gamma_direct, InnerSupMethod};
pub use inner::InnerDp;
pub use oracle::{oracle_select, oracle_select_with, risk_of_partition, Risk};

/// Default penalty constant.
pub const DEFAULT_L: f64 = 0.03;

/// Work counters and wall time of one selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Cube touches while binning and aggregating the pyramid.
    pub binning_visits: u64,
    /// Cubes visited by all inner maximizations.
    pub inner_visits: u64,
    /// Cubes visited by the outer minimization.
    pub outer_visits: u64,
    pub elapsed_secs: f64,
}

impl Diagnostics {
    pub fn cube_visits(&self) -> u64 {
        self.binning_visits + self.inner_visits + self.outer_visits
    }
}

/// Outcome of a selection: the chosen partition, the minimized objective
/// and the histogram on the chosen partition.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub partition: Partition,
    /// `γ(m̂)` for the penalized rule; the true risk for the oracle.
    pub criterion: f64,
    pub estimate: HistogramEstimate,
    pub level: u32,
    pub diagnostics: Diagnostics,
}

impl SelectionResult {
    pub fn to_record(&self, l: f64, n: usize, seed: Option<u64>) -> SelectionRecord {
        SelectionRecord {
            partition: self.partition.clone(),
            values: self.estimate.values().to_vec(),
            gamma: Some(self.criterion),
            l,
            level: self.level,
            n,
            seed,
            diagnostics: self.diagnostics,
        }
    }
}

/// JSON form of a selection: the partition as a split tree, cell values
/// in the tree's leaf order, `γ`, the configuration and timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub partition: Partition,
    pub values: Vec<f64>,
    /// Absent when the sample was too short to run the selection.
    pub gamma: Option<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub level: u32,
    pub n: usize,
    pub seed: Option<u64>,
    pub diagnostics: Diagnostics,
}

impl SelectionRecord {
    pub fn estimate(&self) -> Result<HistogramEstimate> {
        HistogramEstimate::from_parts(self.partition.clone(), self.values.clone())
    }
}

/// Largest useful depth: beyond `n` the selected estimator no longer
/// changes for large `L`, so deeper trees only cost time. Returns the
/// effective level and whether it was clamped.
pub fn effective_level(n: usize, level: u32) -> (u32, bool) {
    if level as usize > n {
        (n as u32, true)
    } else {
        (level, false)
    }
}

/// The selection rule bound to one pyramid, one penalty and one depth cap.
#[derive(Debug, Clone, Copy)]
pub struct Selector<'a> {
    stats: &'a StatsPyramid,
    config: PenaltyConfig,
    level: u32,
    weight: f64,
}

impl<'a> Selector<'a> {
    pub fn new(stats: &'a StatsPyramid, l: f64, level: u32) -> Result<Self> {
        if level > stats.max_level() {
            return Err(Error::InvalidInput(format!(
                "depth {level} exceeds the pyramid level {}",
                stats.max_level()
            )));
        }
        let config = PenaltyConfig::new(l, stats.n())?;
        Ok(Selector {
            stats,
            config,
            level,
            weight: config.leaf_weight(),
        })
    }

    pub fn stats(&self) -> &StatsPyramid {
        self.stats
    }

    pub fn config(&self) -> &PenaltyConfig {
        &self.config
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `SUP_K` for every cube up to the depth cap, level by level, with the
    /// total number of cubes visited.
    pub fn sup_table(&self) -> (Vec<Vec<f64>>, u64) {
        let dim = self.stats.dim();
        let mut visits = 0u64;
        let table = (0..=self.level)
            .map(|j| {
                let count = 1u64 << (j as usize * dim);
                let row: Vec<(f64, u64)> = (0..count)
                    .into_par_iter()
                    .map(|code| self.inner_sup(&DyadicCube::from_code(dim, j, code)))
                    .collect();
                visits += row.iter().map(|r| r.1).sum::<u64>();
                row.into_iter().map(|r| r.0).collect()
            })
            .collect();
        (table, visits)
    }

    /// Runs both programs and returns the exact minimizer of `γ`.
    pub fn run(&self) -> Result<SelectionResult> {
        let start = Instant::now();
        let (sups, inner_visits) = self.sup_table();
        let two_w = 2.0 * self.weight;
        let costs: Vec<Vec<f64>> = sups
            .into_iter()
            .map(|row| row.into_iter().map(|s| s + two_w).collect())
            .collect();
        let (gamma, tree, outer_visits) = min_tree(self.stats.dim(), &costs);
        let partition = tree.to_partition()?;
        let estimate = estimate(&partition, self.stats)?;
        Ok(SelectionResult {
            partition,
            criterion: gamma,
            estimate,
            level: self.level,
            diagnostics: Diagnostics {
                binning_visits: 0,
                inner_visits,
                outer_visits,
                elapsed_secs: start.elapsed().as_secs_f64(),
            },
        })
    }
}

/// Cube touches made by [`StatsPyramid::bin`] at `level`: one per
/// transition at the deepest level plus one per cube aggregated upward.
pub(crate) fn binning_work(n: usize, d: usize, level: u32) -> u64 {
    let cubes: u64 = (1..=level)
        .map(|j| (1u64 << (j as usize * 2 * d)) + (1u64 << (j as usize * d)))
        .sum();
    n as u64 + cubes
}

/// Minimizes an additive leaf cost over all split trees no deeper than
/// `costs.len() - 1`. `costs[j][code]` is the cost of keeping the level-`j`
/// cube `code` as a leaf. Ties keep the leaf. Returns the optimum, the
/// optimal tree and the number of cubes visited.
pub(crate) fn min_tree(dim: usize, costs: &[Vec<f64>]) -> (f64, PartitionTree, u64) {
    let depth = costs.len() - 1;
    let mut best: Vec<Vec<f64>> = Vec::with_capacity(costs.len());
    let mut split: Vec<Vec<bool>> = Vec::with_capacity(costs.len());
    best.resize(costs.len(), Vec::new());
    split.resize(costs.len(), Vec::new());
    best[depth] = costs[depth].clone();
    split[depth] = vec![false; costs[depth].len()];
    let mut visits = costs[depth].len() as u64;
    for j in (0..depth).rev() {
        let (b, s): (Vec<f64>, Vec<bool>) = costs[j]
            .iter()
            .enumerate()
            .map(|(code, &leaf)| {
                let cube = DyadicCube::from_code(dim, j as u32, code as u64);
                let children = (0..cube.child_count())
                    .map(|c| best[j + 1][cube.child_unchecked(c).code() as usize])
                    .fold(0.0, |acc, v| acc + v);
                if leaf <= children {
                    (leaf, false)
                } else {
                    (children, true)
                }
            })
            .unzip();
        visits += b.len() as u64;
        best[j] = b;
        split[j] = s;
    }
    let tree = rebuild(DyadicCube::root(dim), &split);
    (best[0][0], tree, visits)
}

fn rebuild(cube: DyadicCube, split: &[Vec<bool>]) -> PartitionTree {
    if split[cube.level() as usize][cube.code() as usize] {
        PartitionTree::Split(
            cube,
            (0..cube.child_count())
                .map(|c| rebuild(cube.child_unchecked(c), split))
                .collect(),
        )
    } else {
        PartitionTree::Leaf(cube)
    }
}

/// Sum of `cost` over the leaves of `tree`, accumulated in the same order
/// as [`min_tree`] so the optimum is never beaten by rounding.
pub(crate) fn tree_cost(tree: &PartitionTree, cost: &impl Fn(&DyadicCube) -> f64) -> f64 {
    match tree {
        PartitionTree::Leaf(k) => cost(k),
        PartitionTree::Split(_, ch) => ch.iter().fold(0.0, |acc, t| acc + tree_cost(t, cost)),
    }
}

/// Bins `sample` and selects `m̂ ∈ M_ℓ` with penalty constant `l`.
pub fn select(sample: &Sample, l: f64, level: u32) -> Result<SelectionResult> {
    if sample.n() <= 3 {
        return Err(Error::InvalidInput(format!(
            "selection needs n > 3 transitions, got {}",
            sample.n()
        )));
    }
    if level == 0 {
        return Err(Error::InvalidInput(
            "selection depth must be at least 1".into(),
        ));
    }
    let start = Instant::now();
    let stats = StatsPyramid::bin(sample, level)?;
    let mut result = Selector::new(&stats, l, level)?.run()?;
    result.diagnostics.binning_visits = binning_work(sample.n(), sample.d(), level);
    result.diagnostics.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(result)
}
