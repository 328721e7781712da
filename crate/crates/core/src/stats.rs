//! Sufficient statistics of an observed chain on the dyadic pyramid, and the
//! histogram estimator built from them.
//!
//! For a cube `K = I_K × J_K` of `[0,1]^{2d}` the pyramid stores
//!
//! - `N_K`, the number of transitions `(X_i, X_{i+1})` falling in `K`;
//! - `P_I`, the number of `i < n` with `X_i ∈ I`, for every dyadic cube `I`
//!   of `[0,1]^d`.
//!
//! The histogram value on `K` is `N_K / (P_{I_K} μ(J_K))`, with `0/0 = 0`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::partition::{locate, DyadicCube, Partition};
use crate::{Error, Result};

/// Cap on the total number of cubes a pyramid may hold.
pub const PYRAMID_LIMIT: u64 = 1 << 25;

/// Observations `X_0, …, X_n` of a chain in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    d: usize,
    coords: Vec<f64>,
}

impl Sample {
    /// `coords` holds the points back to back, `d` reals each.
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 || d > 31 {
            return Err(Error::InvalidInput(format!(
                "state dimension {d} not in 1..=31"
            )));
        }
        if coords.len() % d != 0 {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not split into points of dimension {d}",
                coords.len()
            )));
        }
        if coords.len() / d < 2 {
            return Err(Error::InvalidInput(
                "a sample needs at least two points (one transition)".into(),
            ));
        }
        Ok(Sample { d, coords })
    }

    /// One-dimensional chain.
    pub fn from_scalars(points: Vec<f64>) -> Result<Self> {
        Sample::new(1, points)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of transitions.
    pub fn n(&self) -> usize {
        self.coords.len() / self.d - 1
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// Fraction of transitions `(X_i, X_{i+1})` lying in `[0,1]^{2d}`.
    pub fn in_square_fraction(&self) -> f64 {
        let inside = |p: &[f64]| p.iter().all(|x| (0.0..=1.0).contains(x));
        let hits = (0..self.n())
            .filter(|&i| inside(self.point(i)) && inside(self.point(i + 1)))
            .count();
        hits as f64 / self.n() as f64
    }

    /// Reads a headerless CSV with one point per row.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Sample::from_csv_reader(file, path)
    }

    pub fn from_csv_reader(reader: impl Read, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut coords = Vec::new();
        let mut d = None;
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: e.to_string(),
                }
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            match d {
                None => d = Some(record.len()),
                Some(d) if d != record.len() => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        msg: format!("expected {d} fields, found {}", record.len()),
                    })
                }
                _ => {}
            }
            for field in record.iter() {
                let x: f64 = field.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("not a number: {field:?}"),
                })?;
                coords.push(x);
            }
        }
        let d = d.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "empty sample".into(),
        })?;
        Sample::new(d, coords)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Packed level-`level` code of the cube of `[0,1]^{d}` containing `p`.
#[inline]
fn locate_point(p: &[f64], level: u32) -> Option<u64> {
    let mut code = 0u64;
    for &x in p {
        code = (code << level) | locate(x, level)?;
    }
    Some(code)
}

/// Transition counts `N_K` and occupancies `P_I` for every level up to
/// `max_level`, in dense per-level arrays indexed by cube code.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsPyramid {
    d: usize,
    n: usize,
    max_level: u32,
    transitions: Vec<Vec<u64>>,
    occupancy: Vec<Vec<u64>>,
}

impl StatsPyramid {
    /// Bins the sample at `max_level` and aggregates coarser levels.
    /// Points outside `[0,1]^d` fall in no cell.
    pub fn bin(sample: &Sample, max_level: u32) -> Result<Self> {
        let d = sample.d();
        let dim = 2 * d;
        if max_level > DyadicCube::max_level(dim) {
            return Err(Error::Capacity(format!(
                "level {max_level} exceeds the maximum {} for d={d}",
                DyadicCube::max_level(dim)
            )));
        }
        let total: u64 = (0..=max_level).map(|j| 1u64 << (j as usize * dim)).sum();
        if total > PYRAMID_LIMIT {
            return Err(Error::Capacity(format!(
                "a level-{max_level} pyramid for d={d} holds {total} cubes (limit {PYRAMID_LIMIT})"
            )));
        }

        let mut transitions: Vec<Vec<u64>> = (0..=max_level)
            .map(|j| vec![0; 1usize << (j as usize * dim)])
            .collect();
        let mut occupancy: Vec<Vec<u64>> = (0..=max_level)
            .map(|j| vec![0; 1usize << (j as usize * d)])
            .collect();

        let top = max_level as usize;
        let y_bits = max_level as usize * d;
        for i in 0..sample.n() {
            if let Some(ix) = locate_point(sample.point(i), max_level) {
                occupancy[top][ix as usize] += 1;
                if let Some(iy) = locate_point(sample.point(i + 1), max_level) {
                    transitions[top][((ix << y_bits) | iy) as usize] += 1;
                }
            }
        }

        for j in (0..max_level).rev() {
            let (coarse, fine) = transitions.split_at_mut(j as usize + 1);
            for (code, &count) in fine[0].iter().enumerate() {
                if count > 0 {
                    let parent = DyadicCube::from_code(dim, j + 1, code as u64).ancestor(j);
                    coarse[j as usize][parent.code() as usize] += count;
                }
            }
            let (coarse, fine) = occupancy.split_at_mut(j as usize + 1);
            for (code, &count) in fine[0].iter().enumerate() {
                if count > 0 {
                    let parent = DyadicCube::from_code(d, j + 1, code as u64).ancestor(j);
                    coarse[j as usize][parent.code() as usize] += count;
                }
            }
        }

        Ok(StatsPyramid {
            d,
            n: sample.n(),
            max_level,
            transitions,
            occupancy,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        2 * self.d
    }

    /// Number of transitions in the binned sample.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    #[inline]
    fn check(&self, k: &DyadicCube) {
        assert!(
            k.dim() == self.dim() && k.level() <= self.max_level,
            "{k:?} is not covered by a level-{} pyramid of dimension {}",
            self.max_level,
            self.dim()
        );
    }

    /// `N_K`.
    #[inline]
    pub fn transitions(&self, k: &DyadicCube) -> u64 {
        self.check(k);
        self.transitions[k.level() as usize][k.code() as usize]
    }

    /// `P_{I_K}`.
    #[inline]
    pub fn occupancy(&self, k: &DyadicCube) -> u64 {
        self.check(k);
        let bits = k.level() as usize * self.d;
        self.occupancy[k.level() as usize][(k.code() >> bits) as usize]
    }

    /// Occupancy of a cube `I` of `[0,1]^d`.
    pub fn column_occupancy(&self, i: &DyadicCube) -> u64 {
        assert!(i.dim() == self.d && i.level() <= self.max_level);
        self.occupancy[i.level() as usize][i.code() as usize]
    }

    /// `Σ_i ∫ 1_K(X_i, y) dμ(y) = P_{I_K} μ(J_K)`.
    #[inline]
    pub fn mass(&self, k: &DyadicCube) -> f64 {
        self.occupancy(k) as f64 * (-((k.level() as usize * self.d) as f64)).exp2()
    }

    /// Histogram value `N_K / (P_{I_K} μ(J_K))`, `0` when the column is empty.
    #[inline]
    pub fn cell_value(&self, k: &DyadicCube) -> f64 {
        let p = self.occupancy(k);
        if p == 0 {
            return 0.0;
        }
        let scale = ((k.level() as usize * self.d) as f64).exp2();
        self.transitions(k) as f64 * scale / p as f64
    }

    /// Raw per-level arrays, indexed by cube code.
    pub fn level_transitions(&self, level: u32) -> &[u64] {
        &self.transitions[level as usize]
    }

    pub fn level_occupancy(&self, level: u32) -> &[u64] {
        &self.occupancy[level as usize]
    }
}

/// Histogram value on one cube; see [`StatsPyramid::cell_value`].
pub fn cell_value(k: &DyadicCube, stats: &StatsPyramid) -> f64 {
    stats.cell_value(k)
}

/// A nonnegative function constant on the cells of a partition and zero
/// outside `[0,1]^{2d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramEstimate {
    partition: Partition,
    values: Vec<f64>,
    lookup: HashMap<DyadicCube, usize>,
}

impl HistogramEstimate {
    pub fn from_parts(partition: Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} cells",
                values.len(),
                partition.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "cell value {v} is not a finite nonnegative real"
            )));
        }
        let lookup = partition
            .cells()
            .iter()
            .enumerate()
            .map(|(i, c)| (*c, i))
            .collect();
        Ok(HistogramEstimate {
            partition,
            values,
            lookup,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Values aligned with `partition().cells()`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_of(&self, cell: &DyadicCube) -> Option<f64> {
        self.lookup.get(cell).map(|&i| self.values[i])
    }

    /// Value at `(x, y)`; zero off `[0,1]^{2d}`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        let point: Vec<f64> = x.iter().chain(y).copied().collect();
        if point.len() != self.partition.dim() {
            return 0.0;
        }
        for level in 0..=self.partition.max_level() {
            let Some(cube) = DyadicCube::containing(&point, level) else {
                return 0.0;
            };
            if let Some(v) = self.value_of(&cube) {
                return v;
            }
        }
        unreachable!("partition does not cover [0,1]^D")
    }
}

/// The histogram estimator `ŝ_m` on partition `m`.
pub fn estimate(m: &Partition, stats: &StatsPyramid) -> Result<HistogramEstimate> {
    if m.dim() != stats.dim() {
        return Err(Error::InvalidInput(format!(
            "partition of dimension {} against statistics of dimension {}",
            m.dim(),
            stats.dim()
        )));
    }
    if m.max_level() > stats.max_level() {
        return Err(Error::InvalidInput(format!(
            "partition depth {} exceeds the pyramid level {}",
            m.max_level(),
            stats.max_level()
        )));
    }
    let values = m.cells().iter().map(|k| stats.cell_value(k)).collect();
    HistogramEstimate::from_parts(m.clone(), values)
}
