//! Monte-Carlo risk experiments: simulate, select at each depth, score
//! against the known density, aggregate.

use std::fs::File;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::loss::{empirical_l2, hellinger2_vs_truth, TruthIntegrals};
use crate::quad::QuadSpec;
use crate::select::{oracle_select_with, risk_of_partition, Risk, Selector};
use crate::stats::StatsPyramid;
use crate::{Error, Result};

use super::{simulate, ChainSpec, Example};

/// Quantile levels reported for the ratio to the oracle.
pub const QUANTILE_LEVELS: [f64; 4] = [0.5, 0.75, 0.9, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub example: Example,
    pub n: usize,
    pub levels: Vec<u32>,
    pub l: f64,
    pub replicates: usize,
    pub base_seed: u64,
    pub quad: QuadSpec,
    /// Also select the true-risk oracle and report the ratio to it.
    pub oracle: bool,
    /// Overrides the example's default burn-in.
    pub burn_in: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(example: Example, n: usize, levels: Vec<u32>) -> Self {
        ExperimentConfig {
            example,
            n,
            levels,
            l: crate::select::DEFAULT_L,
            replicates: 1,
            base_seed: 0,
            quad: QuadSpec::default(),
            oracle: false,
            burn_in: None,
        }
    }

    /// Seed of replicate `r`, so that any single replicate can be rerun
    /// from the command line.
    pub fn replicate_seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n <= 3 {
            return Err(Error::Config(format!("n = {} must exceed 3", self.n)));
        }
        if self.replicates == 0 {
            return Err(Error::Config("at least one replicate is needed".into()));
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(Error::Config(
                "depths must be a nonempty list of positive integers".into(),
            ));
        }
        if self.oracle && self.levels.iter().any(|&l| l > 10) {
            return Err(Error::Config("oracle risks are limited to depth 10".into()));
        }
        self.quad.validate()
    }

    fn chain(&self) -> ChainSpec {
        let spec = ChainSpec::new(self.example);
        match self.burn_in {
            Some(p) => spec.with_burn_in(p),
            None => spec,
        }
    }
}

/// One replicate at one depth. `oracle_h2` and `ratio` are present when the
/// oracle was requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub example: u8,
    pub ell: u32,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub h2_risk: f64,
    pub l2_risk: f64,
    pub oracle_h2: Option<f64>,
    pub ratio: Option<f64>,
}

/// Aggregate over replicates at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub example: u8,
    pub ell: u32,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub replicates: usize,
    pub mean_h2: f64,
    pub sd_h2: f64,
    pub mean_l2: f64,
    pub mean_oracle_h2: Option<f64>,
    pub q50: Option<f64>,
    pub q75: Option<f64>,
    pub q90: Option<f64>,
    pub q95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub rows: Vec<RiskRow>,
}

/// Linear-interpolation quantile of sorted data (type 7).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl RiskReport {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut levels: Vec<u32> = self.rows.iter().map(|r| r.ell).collect();
        levels.sort_unstable();
        levels.dedup();
        levels
            .into_iter()
            .map(|ell| {
                let rows: Vec<&RiskRow> = self.rows.iter().filter(|r| r.ell == ell).collect();
                let h2: Vec<f64> = rows.iter().map(|r| r.h2_risk).collect();
                let l2: Vec<f64> = rows.iter().map(|r| r.l2_risk).collect();
                let m = mean(&h2);
                let sd = if h2.len() > 1 {
                    (h2.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (h2.len() - 1) as f64).sqrt()
                } else {
                    0.0
                };
                let oracle: Option<Vec<f64>> = rows.iter().map(|r| r.oracle_h2).collect();
                let mut ratios: Option<Vec<f64>> = rows.iter().map(|r| r.ratio).collect();
                if let Some(r) = ratios.as_mut() {
                    r.sort_by(f64::total_cmp);
                }
                let q = |p: f64| ratios.as_ref().map(|r| quantile(r, p));
                SummaryRow {
                    example: rows[0].example,
                    ell,
                    l: rows[0].l,
                    n: rows[0].n,
                    replicates: rows.len(),
                    mean_h2: m,
                    sd_h2: sd,
                    mean_l2: mean(&l2),
                    mean_oracle_h2: oracle.map(|o| mean(&o)),
                    q50: q(QUANTILE_LEVELS[0]),
                    q75: q(QUANTILE_LEVELS[1]),
                    q90: q(QUANTILE_LEVELS[2]),
                    q95: q(QUANTILE_LEVELS[3]),
                }
            })
            .collect()
    }

    /// Path of the aggregate file next to `path`: `risk.csv` becomes
    /// `risk_summary.csv`.
    pub fn summary_path(path: &Path) -> PathBuf {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("risk");
        path.with_file_name(format!("{stem}_summary.csv"))
    }

    /// Writes the per-replicate rows to `path` and the aggregates to the
    /// sibling `_summary.csv`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_rows(path, &self.rows)?;
        write_rows(&Self::summary_path(path), &self.summary())
    }

    pub fn read_csv(path: &Path) -> Result<Vec<RiskRow>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        reader
            .deserialize()
            .enumerate()
            .map(|(i, r)| {
                r.map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: i as u64 + 2,
                    msg: e.to_string(),
                })
            })
            .collect()
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

fn run_replicate(cfg: &ExperimentConfig, r: usize) -> Result<Vec<RiskRow>> {
    let seed = cfg.replicate_seed(r);
    let sample = simulate(&cfg.chain(), cfg.n, seed)?;
    let depth = *cfg.levels.iter().max().unwrap();
    let stats = StatsPyramid::bin(&sample, depth)?;
    let integrals = if cfg.oracle {
        Some(TruthIntegrals::build(
            &cfg.example,
            &sample,
            depth,
            &cfg.quad,
        )?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(cfg.levels.len());
    for &ell in &cfg.levels {
        let selected = Selector::new(&stats, cfg.l, ell)?.run()?;
        let (h2, l2, oracle_h2) = match &integrals {
            Some(ti) => {
                let oracle = oracle_select_with(&stats, ti, ell)?;
                let h2 = risk_of_partition(&selected.partition, &stats, ti, Risk::Hellinger);
                let l2 = risk_of_partition(&selected.partition, &stats, ti, Risk::L2);
                (h2, l2, Some(oracle.criterion))
            }
            None => (
                hellinger2_vs_truth(&cfg.example, &selected.estimate, &sample, &cfg.quad)?,
                empirical_l2(&cfg.example, &selected.estimate, &sample, &cfg.quad)?,
                None,
            ),
        };
        rows.push(RiskRow {
            example: cfg.example.id(),
            ell,
            l: cfg.l,
            n: cfg.n,
            replicate: r,
            seed,
            h2_risk: h2,
            l2_risk: l2,
            oracle_h2,
            ratio: oracle_h2.map(|o| h2 / o),
        });
    }
    Ok(rows)
}

/// Runs every replicate in parallel. Rows come back ordered by replicate
/// and then by depth whatever the schedule.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RiskReport> {
    cfg.validate()?;
    let per_replicate: Vec<Vec<RiskRow>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, r))
        .collect::<Result<_>>()?;
    Ok(RiskReport {
        rows: per_replicate.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_type_seven() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.9) - 3.7).abs() < 1e-12);
        assert_eq!(quantile(&[5.0], 0.75), 5.0);
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::new(Example::Ar, 100, vec![2]);
        assert!(ok.validate().is_ok());
        assert!(ExperimentConfig::new(Example::Ar, 3, vec![2])
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(Example::Ar, 100, vec![])
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(Example::Ar, 100, vec![0, 1])
            .validate()
            .is_err());
        let mut deep = ExperimentConfig::new(Example::Ar, 100, vec![11]);
        assert!(deep.validate().is_ok());
        deep.oracle = true;
        assert!(deep.validate().is_err());
    }

    #[test]
    fn results_do_not_depend_on_the_schedule() {
        let mut cfg = ExperimentConfig::new(Example::Bimodal, 200, vec![2, 4]);
        cfg.replicates = 6;
        cfg.base_seed = 100;
        cfg.oracle = true;
        let a = run_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_experiment(&cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 12);
        for (i, row) in a.rows.iter().enumerate() {
            assert_eq!(row.replicate, i / 2);
            assert_eq!(row.seed, 100 + (i / 2) as u64);
            assert!(row.oracle_h2.unwrap() <= row.h2_risk);
            assert!(row.ratio.unwrap() >= 1.0);
        }
    }

    #[test]
    fn oracle_and_direct_risks_agree() {
        let mut cfg = ExperimentConfig::new(Example::Ar, 300, vec![3]);
        cfg.replicates = 2;
        let direct = run_experiment(&cfg).unwrap();
        cfg.oracle = true;
        let via_moments = run_experiment(&cfg).unwrap();
        for (a, b) in direct.rows.iter().zip(&via_moments.rows) {
            assert!((a.h2_risk - b.h2_risk).abs() < 1e-9);
            assert!((a.l2_risk - b.l2_risk).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip_and_summary() {
        let mut cfg = ExperimentConfig::new(Example::ArNarrow, 150, vec![1, 2]);
        cfg.replicates = 3;
        cfg.oracle = true;
        let report = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("risk.csv");
        report.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(
            text.starts_with("example,ell,L,n,replicate,seed,h2_risk,l2_risk,oracle_h2,ratio\n")
        );
        assert_eq!(RiskReport::read_csv(&path).unwrap(), report.rows);
        let summary = std::fs::read_to_string(dir.path().join("risk_summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 3);
        let s = report.summary();
        assert_eq!(s[0].replicates, 3);
        assert!(s[0].q50.unwrap() >= 1.0);
    }
}
