use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use mctd_core::select::{effective_level, select, Diagnostics, SelectionRecord};
use mctd_core::sim::{
    run_experiment, ChainSpec, Example, ExperimentConfig, RiskReport, SummaryRow,
};
use mctd_core::stats::estimate as histogram;
use mctd_core::{Error, HistogramEstimate, Partition, Sample, StatsPyramid};
use serde::Serialize;

use crate::reference;
use crate::{EstimateArgs, ReproduceArgs, RiskArgs, SimulateArgs, Table};

fn chain_spec(example: Example, burn_in: Option<usize>) -> ChainSpec {
    let spec = ChainSpec::new(example);
    match burn_in {
        Some(p) => spec.with_burn_in(p),
        None => spec,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(())
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufWriter::new(file))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let example = Example::from_id(args.example)?;
    let sample = mctd_core::sim::simulate(&chain_spec(example, args.burn_in), args.n, args.seed)?;
    info!(
        "example {} n = {} seed = {}; fraction of transitions inside the unit square {:.4}",
        args.example,
        args.n,
        args.seed,
        sample.in_square_fraction()
    );
    match &args.out {
        Some(path) => sample.write_csv(path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            sample.write_csv_to(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Selection for samples with at least four transitions; the trivial
/// partition and its histogram otherwise.
fn select_or_trivial(
    sample: &Sample,
    l: f64,
    level: u32,
    seed: Option<u64>,
) -> Result<SelectionRecord> {
    let n = sample.n();
    if n <= 3 {
        warn!("only {n} transitions; skipping the selection and returning the trivial partition");
        let stats = StatsPyramid::bin(sample, 0)?;
        let est = histogram(&Partition::trivial(2 * sample.d()), &stats)?;
        return Ok(SelectionRecord {
            partition: est.partition().clone(),
            values: est.values().to_vec(),
            gamma: None,
            l,
            level: 0,
            n,
            seed,
            diagnostics: Diagnostics::default(),
        });
    }
    let (level, clamped) = effective_level(n, level);
    if clamped {
        info!("depth reduced to n = {level}: deeper partitions cannot change the estimate");
    }
    Ok(select(sample, l, level)?.to_record(l, n, seed))
}

/// Values at the midpoints of a `side × side` grid over `[0,1]^2`, row by
/// row with `x` outer.
fn write_grid(path: &Path, side: usize, f: impl Fn(f64, f64) -> f64) -> Result<()> {
    let mut w = create_file(path)?;
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(w, "x,y,value").map_err(io)?;
    for i in 0..side {
        let x = (i as f64 + 0.5) / side as f64;
        for j in 0..side {
            let y = (j as f64 + 0.5) / side as f64;
            writeln!(w, "{x:?},{y:?},{:?}", f(x, y)).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn estimate(args: &EstimateArgs) -> Result<()> {
    if args.ell == 0 {
        bail!(Error::Config("--ell must be at least 1".into()));
    }
    if args.grid == 0 {
        bail!(Error::Config("--grid must be at least 1".into()));
    }
    let (sample, example, seed) = match (&args.input, args.example) {
        (Some(path), _) => (Sample::read_csv(path)?, None, None),
        (None, Some(id)) => {
            let example = Example::from_id(id)?;
            let sample = mctd_core::sim::simulate(&ChainSpec::new(example), args.n, args.seed)?;
            (sample, Some(example), Some(args.seed))
        }
        (None, None) => bail!(Error::Config(
            "either --input or --example is required".into()
        )),
    };
    info!(
        "{} transitions in dimension {}; fraction inside the unit square {:.4}",
        sample.n(),
        sample.d(),
        sample.in_square_fraction()
    );
    let record = select_or_trivial(&sample, args.l, args.ell, seed)?;
    info!(
        "selected {} cells at depth {} in {:.3} s",
        record.partition.len(),
        record.level,
        record.diagnostics.elapsed_secs
    );

    create_dir(&args.out)?;
    let json_path = args.out.join("estimate.json");
    let mut w = create_file(&json_path)?;
    serde_json::to_writer_pretty(&mut w, &record)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            path: json_path.clone(),
            source,
        })?;

    if sample.d() != 1 {
        warn!("evaluation grids are only written for scalar chains");
        return Ok(());
    }
    let est: HistogramEstimate = record.estimate()?;
    write_grid(&args.out.join("grid.csv"), args.grid, |x, y| {
        est.evaluate(&[x], &[y])
    })?;
    if let Some(example) = example {
        write_grid(&args.out.join("truth_grid.csv"), args.grid, |x, y| {
            example.density_at(x, y)
        })?;
    }
    Ok(())
}

fn experiment(example: Example, args: &RiskArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(example, args.n, args.ell.clone());
    cfg.l = args.l;
    cfg.replicates = args.replicates;
    cfg.base_seed = args.seed;
    cfg.oracle = args.oracle;
    cfg.quad = args.quad.spec();
    cfg
}

pub fn risk(args: &RiskArgs) -> Result<()> {
    let example = Example::from_id(args.example)?;
    let cfg = experiment(example, args);
    let report = run_experiment(&cfg)?;
    create_dir(&args.out)?;
    let path = args.out.join(format!("risk_ex{}.csv", args.example));
    report.write_csv(&path)?;
    for row in report.summary() {
        info!(
            "ell = {:2}: mean H2 {:.4} (sd {:.4}), mean L2 {:.4}",
            row.ell, row.mean_h2, row.sd_h2, row.mean_l2
        );
    }
    info!(
        "wrote {} and {}",
        path.display(),
        RiskReport::summary_path(&path).display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct DepthComparison {
    example: u8,
    ell: u32,
    reference_h2: f64,
    measured_h2: f64,
    sd_h2: f64,
    replicates: usize,
}

#[derive(Debug, Serialize)]
struct MetricComparison {
    example: u8,
    metric: String,
    reference: f64,
    measured: f64,
}

fn compare_path(out: &Path, table: Table) -> PathBuf {
    out.join(format!("{}_compare.csv", table_name(table)))
}

fn table_name(table: Table) -> &'static str {
    match table {
        Table::Figure2 => "figure2",
        Table::Figure4 => "figure4",
        Table::Figure5 => "figure5",
    }
}

fn depth_comparison(e: usize, summary: &[SummaryRow]) -> Vec<DepthComparison> {
    summary
        .iter()
        .map(|row| {
            let i = reference::FIGURE2_LEVELS
                .iter()
                .position(|&l| l == row.ell)
                .unwrap();
            DepthComparison {
                example: row.example,
                ell: row.ell,
                reference_h2: reference::FIGURE2_MEAN_H2[i][e],
                measured_h2: row.mean_h2,
                sd_h2: row.sd_h2,
                replicates: row.replicates,
            }
        })
        .collect()
}

fn comparison_metrics(table: Table, e: usize, row: &SummaryRow) -> Vec<MetricComparison> {
    let id = row.example;
    let metric = |name: &str, reference: f64, measured: f64| MetricComparison {
        example: id,
        metric: name.to_string(),
        reference,
        measured,
    };
    match table {
        Table::Figure5 => vec![metric(
            "mean_l2",
            reference::FIGURE5_MEAN_L2[e],
            row.mean_l2,
        )],
        _ => {
            let measured = [row.q50, row.q75, row.q90, row.q95];
            let mut v = vec![
                metric(
                    "mean_h2",
                    reference::FIGURE4_MEAN_H2_SELECTED[e],
                    row.mean_h2,
                ),
                metric(
                    "mean_oracle_h2",
                    reference::FIGURE4_MEAN_H2_ORACLE[e],
                    row.mean_oracle_h2.unwrap_or(f64::NAN),
                ),
            ];
            for (k, name) in ["q50", "q75", "q90", "q95"].iter().enumerate() {
                v.push(metric(
                    name,
                    reference::FIGURE4_RATIO_QUANTILES[k][e],
                    measured[k].unwrap_or(f64::NAN),
                ));
            }
            v
        }
    }
}

pub fn reproduce(args: &ReproduceArgs) -> Result<()> {
    let examples = match args.example {
        Some(id) => vec![Example::from_id(id)?],
        None => Example::ALL.to_vec(),
    };
    let (levels, default_replicates) = match args.table {
        Table::Figure2 => (
            reference::FIGURE2_LEVELS.to_vec(),
            reference::FIGURE2_REPLICATES,
        ),
        _ => (
            vec![reference::COMPARISON_LEVEL],
            reference::COMPARISON_REPLICATES,
        ),
    };
    let replicates = args.replicates.unwrap_or(default_replicates);
    create_dir(&args.out)?;
    let name = table_name(args.table);

    let mut depth_rows = Vec::new();
    let mut metric_rows = Vec::new();
    let mut all_rows = Vec::new();
    for example in examples {
        let e = example.id() as usize - 1;
        let mut cfg = ExperimentConfig::new(example, 1000, levels.clone());
        cfg.replicates = replicates;
        cfg.base_seed = args.seed;
        cfg.quad = args.quad.spec();
        cfg.oracle = args.table == Table::Figure4;
        let report = run_experiment(&cfg).with_context(|| format!("example {}", example.id()))?;
        let summary = report.summary();
        match args.table {
            Table::Figure2 => depth_rows.extend(depth_comparison(e, &summary)),
            table => metric_rows.extend(comparison_metrics(table, e, &summary[0])),
        }
        info!("example {} done ({} replicates)", example.id(), replicates);
        all_rows.extend(report.rows);
    }

    let report = RiskReport { rows: all_rows };
    let path = args.out.join(format!("{name}.csv"));
    report.write_csv(&path)?;
    let compare = compare_path(&args.out, args.table);
    if args.table == Table::Figure2 {
        write_rows(&compare, &depth_rows)?;
    } else {
        write_rows(&compare, &metric_rows)?;
    }
    info!(
        "wrote {}, {} and {}",
        path.display(),
        RiskReport::summary_path(&path).display(),
        compare.display()
    );
    Ok(())
}
