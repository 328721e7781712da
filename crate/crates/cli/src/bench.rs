//! Wall-clock and cube-visit measurements of the selection on the first
//! example chain, with two least-squares fits: the exponent of `n` at each
//! depth and the coefficient of `ℓ·4^ℓ` at each sample size.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use log::info;
use mctd_core::select::select;
use mctd_core::sim::{simulate, ChainSpec, Example};
use mctd_core::Error;
use serde::{Deserialize, Serialize};

use crate::BenchArgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub ell: u32,
    /// Median over the repeats.
    pub seconds: f64,
    pub cube_visits: u64,
    /// `n·ℓ + ℓ·4^{ℓ+1}`.
    pub bound: f64,
}

/// `n_exponent` rows carry `ell` and the slope of `ln t` on `ln n`;
/// `depth_trend` rows carry `n` and the slope of `t` on `ℓ·4^ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub fit: String,
    pub n: Option<usize>,
    pub ell: Option<u32>,
    pub coefficient: f64,
    pub r_squared: f64,
}

fn bound(n: usize, ell: u32) -> f64 {
    let l = ell as f64;
    n as f64 * l + l * 4f64.powi(ell as i32 + 1)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Ordinary least squares `y ≈ a + b·x`; returns `(b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, r2)
}

pub fn fits(rows: &[TimingRow]) -> Vec<FitRow> {
    let mut ells: Vec<u32> = rows.iter().map(|r| r.ell).collect();
    ells.sort_unstable();
    ells.dedup();
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();

    let mut out = Vec::new();
    for &ell in &ells {
        let pts: Vec<&TimingRow> = rows.iter().filter(|r| r.ell == ell).collect();
        if pts.len() < 2 {
            continue;
        }
        let x: Vec<f64> = pts.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = pts.iter().map(|r| r.seconds.max(1e-9).ln()).collect();
        let (coefficient, r_squared) = linear_fit(&x, &y);
        out.push(FitRow {
            fit: "n_exponent".into(),
            n: None,
            ell: Some(ell),
            coefficient,
            r_squared,
        });
    }
    for &n in &ns {
        let pts: Vec<&TimingRow> = rows.iter().filter(|r| r.n == n).collect();
        if pts.len() < 2 {
            continue;
        }
        let x: Vec<f64> = pts
            .iter()
            .map(|r| r.ell as f64 * 4f64.powi(r.ell as i32))
            .collect();
        let y: Vec<f64> = pts.iter().map(|r| r.seconds).collect();
        let (coefficient, r_squared) = linear_fit(&x, &y);
        out.push(FitRow {
            fit: "depth_trend".into(),
            n: Some(n),
            ell: None,
            coefficient,
            r_squared,
        });
    }
    out
}

pub fn fit_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    path.with_file_name(format!("{stem}_fit.csv"))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &BenchArgs) -> Result<()> {
    if args.repeats == 0 || args.n.is_empty() || args.ell.is_empty() {
        bail!(Error::Config(
            "bench needs at least one n, one depth and one repeat".into()
        ));
    }
    let mut rows = Vec::new();
    for &n in &args.n {
        let sample = simulate(&ChainSpec::new(Example::Ar), n, args.seed)?;
        for &ell in &args.ell {
            let mut times = Vec::with_capacity(args.repeats);
            let mut visits = 0;
            for _ in 0..args.repeats {
                let r = select(&sample, mctd_core::select::DEFAULT_L, ell)?;
                times.push(r.diagnostics.elapsed_secs);
                visits = r.diagnostics.cube_visits();
            }
            let seconds = median(times);
            info!("n = {n:5}, ell = {ell}: {seconds:.4} s, {visits} cube visits");
            rows.push(TimingRow {
                n,
                ell,
                seconds,
                cube_visits: visits,
                bound: bound(n, ell),
            });
        }
    }
    write_csv(&args.out, &rows)?;
    let fitted = fits(&rows);
    for f in &fitted {
        info!(
            "{} {:?} {:?}: {:.4} (R² {:.3})",
            f.fit, f.n, f.ell, f.coefficient, f.r_squared
        );
    }
    write_csv(&fit_path(&args.out), &fitted)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.5 * v).collect();
        let (b, r2) = linear_fit(&x, &y);
        assert!((b - 0.5).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn power_law_exponent() {
        let rows: Vec<TimingRow> = [500usize, 1000, 2000]
            .iter()
            .map(|&n| TimingRow {
                n,
                ell: 3,
                seconds: 1e-6 * (n as f64).powf(1.2),
                cube_visits: 0,
                bound: bound(n, 3),
            })
            .collect();
        let f = fits(&rows);
        assert_eq!(f.len(), 1);
        assert!((f[0].coefficient - 1.2).abs() < 1e-9);
    }
}
