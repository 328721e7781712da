//! Dyadic cubes of `[0,1]^D`, the partitions obtained by recursive dyadic
//! splitting and their split trees.
//!
//! A cube is identified by its level `j` and its index vector
//! `l ∈ {1..2^j}^D`. Internally the index vector is packed into a single
//! mixed-radix code with the first coordinate most significant, so codes at a
//! fixed level are ordered lexicographically on `l` and double as dense array
//! offsets.
//!
//! Intervals are half-open except the last one at every level, which is
//! closed at `1`. Every point of `[0,1]^D` therefore lies in exactly one cube
//! per level.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest count that [`enumerate_partitions`] agrees to materialize.
pub const ENUMERATION_LIMIT: u128 = 100_000;

/// Returns the 0-based index of the level-`level` dyadic interval containing
/// `x`, or `None` when `x` lies outside `[0,1]`.
#[inline]
pub fn locate(x: f64, level: u32) -> Option<u64> {
    if !(0.0..=1.0).contains(&x) {
        return None;
    }
    let cells = 1u64 << level;
    // Scaling by a power of two is exact, so the floor is the exact dyadic index.
    let idx = (x * cells as f64).floor() as u64;
    Some(idx.min(cells - 1))
}

/// `I_j(l)`: the `l`-th dyadic interval of level `j` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    level: u32,
    index: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, l: u64) -> Result<Self> {
        if level > 62 {
            return Err(Error::Capacity(format!(
                "interval level {level} exceeds 62"
            )));
        }
        if l == 0 || l > (1u64 << level) {
            return Err(Error::InvalidInput(format!(
                "interval index {l} outside 1..={} at level {level}",
                1u64 << level
            )));
        }
        Ok(DyadicInterval { level, index: l })
    }

    /// The interval of level `level` containing `x`.
    pub fn containing(x: f64, level: u32) -> Option<Self> {
        locate(x, level).map(|i| DyadicInterval {
            level,
            index: i + 1,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// 1-based index `l`.
    pub fn l(&self) -> u64 {
        self.index
    }

    pub fn lower(&self) -> f64 {
        (self.index - 1) as f64 / (1u64 << self.level) as f64
    }

    pub fn upper(&self) -> f64 {
        self.index as f64 / (1u64 << self.level) as f64
    }

    pub fn length(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Membership honoring the closed right end of the last interval.
    pub fn contains(&self, x: f64) -> bool {
        locate(x, self.level) == Some(self.index - 1)
    }
}

/// A dyadic cube `K_{j,l}` of `[0,1]^D`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    dim: u8,
    level: u8,
    code: u64,
}

impl fmt::Debug for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K(j={}, l={:?})", self.level, self.l())
    }
}

impl DyadicCube {
    /// Deepest level representable for a cube of dimension `dim`.
    pub const fn max_level(dim: usize) -> u32 {
        (62 / dim) as u32
    }

    /// `[0,1]^dim`.
    pub fn root(dim: usize) -> Self {
        assert!((1..=62).contains(&dim), "cube dimension must be in 1..=62");
        DyadicCube {
            dim: dim as u8,
            level: 0,
            code: 0,
        }
    }

    /// Builds `K_{j,l}` from a 1-based index vector; its length is the
    /// dimension.
    pub fn new(level: u32, l: &[u64]) -> Result<Self> {
        let dim = l.len();
        if dim == 0 || dim > 62 {
            return Err(Error::InvalidInput(format!(
                "cube dimension {dim} not in 1..=62"
            )));
        }
        if level > Self::max_level(dim) {
            return Err(Error::Capacity(format!(
                "level {level} exceeds the maximum {} for dimension {dim}",
                Self::max_level(dim)
            )));
        }
        let side = 1u64 << level;
        let mut code = 0u64;
        for &li in l {
            if li == 0 || li > side {
                return Err(Error::InvalidInput(format!(
                    "cube index {li} outside 1..={side} at level {level}"
                )));
            }
            code = (code << level) | (li - 1);
        }
        Ok(DyadicCube {
            dim: dim as u8,
            level: level as u8,
            code,
        })
    }

    /// Cube of the given level and packed code. The code must be below
    /// `2^{level·dim}`.
    pub fn from_code(dim: usize, level: u32, code: u64) -> Self {
        debug_assert!(level <= Self::max_level(dim));
        debug_assert!(code < 1u64 << (level as usize * dim));
        DyadicCube {
            dim: dim as u8,
            level: level as u8,
            code,
        }
    }

    /// The cube of level `level` containing `point`, if the point lies in
    /// `[0,1]^D`.
    pub fn containing(point: &[f64], level: u32) -> Option<Self> {
        let dim = point.len();
        let mut code = 0u64;
        for &x in point {
            code = (code << level) | locate(x, level)?;
        }
        Some(DyadicCube::from_code(dim, level, code))
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn level(&self) -> u32 {
        self.level as u32
    }

    /// Dense offset of the cube among the `2^{jD}` cubes of its level.
    pub fn code(&self) -> u64 {
        self.code
    }

    /// 0-based position along coordinate `k`.
    #[inline]
    pub fn offset(&self, k: usize) -> u64 {
        let level = self.level as u32;
        let shift = level as usize * (self.dim as usize - 1 - k);
        (self.code >> shift) & ((1u64 << level) - 1)
    }

    /// The 1-based index vector `l`.
    pub fn l(&self) -> Vec<u64> {
        (0..self.dim()).map(|k| self.offset(k) + 1).collect()
    }

    /// The factor interval along coordinate `k`.
    pub fn interval(&self, k: usize) -> DyadicInterval {
        DyadicInterval {
            level: self.level(),
            index: self.offset(k) + 1,
        }
    }

    /// Lebesgue measure `2^{-jD}`.
    pub fn measure(&self) -> f64 {
        (-((self.level as usize * self.dim as usize) as f64)).exp2()
    }

    pub fn child_count(&self) -> usize {
        1 << self.dim
    }

    /// The `c`-th child in lexicographic order, without level checks.
    #[inline]
    pub(crate) fn child_unchecked(&self, c: usize) -> DyadicCube {
        let dim = self.dim as usize;
        let level = self.level as u32 + 1;
        let mut code = 0u64;
        for k in 0..dim {
            let bit = ((c >> (dim - 1 - k)) & 1) as u64;
            code = (code << level) | (2 * self.offset(k) + bit);
        }
        DyadicCube {
            dim: self.dim,
            level: level as u8,
            code,
        }
    }

    /// The `2^D` level-`j+1` cubes whose union is this cube, in
    /// lexicographic order of their index vectors.
    pub fn children(&self) -> Result<Vec<DyadicCube>> {
        if self.level() >= Self::max_level(self.dim()) {
            return Err(Error::Capacity(format!(
                "cannot split a cube at level {}: maximum level for dimension {} is {}",
                self.level,
                self.dim,
                Self::max_level(self.dim())
            )));
        }
        Ok((0..self.child_count())
            .map(|c| self.child_unchecked(c))
            .collect())
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| self.ancestor(self.level() - 1))
    }

    /// The containing cube at a coarser (or equal) level.
    pub fn ancestor(&self, level: u32) -> DyadicCube {
        assert!(level <= self.level());
        let shift = self.level() - level;
        let mut code = 0u64;
        for k in 0..self.dim() {
            code = (code << level) | (self.offset(k) >> shift);
        }
        DyadicCube {
            dim: self.dim,
            level: level as u8,
            code,
        }
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.dim == other.dim
            && self.level <= other.level
            && other.ancestor(self.level()).code == self.code
    }

    pub fn contains_point(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(k, &x)| locate(x, self.level()) == Some(self.offset(k)))
    }

    /// Projection on the first `D/2` coordinates (`I_K`).
    pub fn x_part(&self) -> DyadicCube {
        let d = self.dim() / 2;
        DyadicCube {
            dim: d as u8,
            level: self.level,
            code: self.code >> (self.level as usize * d),
        }
    }

    /// Projection on the last `D/2` coordinates (`J_K`).
    pub fn y_part(&self) -> DyadicCube {
        let d = self.dim() / 2;
        let bits = self.level as usize * d;
        DyadicCube {
            dim: d as u8,
            level: self.level,
            code: self.code & ((1u64 << bits) - 1),
        }
    }
}

/// `a ∩ b` for dyadic cubes: the deeper cube when nested, `None` when
/// disjoint. Dyadic cubes never overlap partially.
pub fn intersect(a: &DyadicCube, b: &DyadicCube) -> Option<DyadicCube> {
    debug_assert_eq!(a.dim, b.dim, "intersecting cubes of different dimension");
    if a.contains(b) {
        Some(*b)
    } else if b.contains(a) {
        Some(*a)
    } else {
        None
    }
}

/// Split tree of a partition: leaves are the cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionTree {
    Leaf(DyadicCube),
    Split(DyadicCube, Vec<PartitionTree>),
}

impl PartitionTree {
    pub fn cube(&self) -> &DyadicCube {
        match self {
            PartitionTree::Leaf(c) | PartitionTree::Split(c, _) => c,
        }
    }

    /// Depth below the tree's own root.
    pub fn depth(&self) -> u32 {
        match self {
            PartitionTree::Leaf(_) => 0,
            PartitionTree::Split(_, ch) => 1 + ch.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            PartitionTree::Leaf(_) => 1,
            PartitionTree::Split(_, ch) => ch.iter().map(|c| c.leaf_count()).sum(),
        }
    }

    /// Leaves in depth-first, lexicographic child order.
    pub fn leaves(&self) -> Vec<DyadicCube> {
        let mut out = Vec::with_capacity(self.leaf_count());
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<DyadicCube>) {
        match self {
            PartitionTree::Leaf(c) => out.push(*c),
            PartitionTree::Split(_, ch) => ch.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Checks that every split node carries exactly its cube's children.
    pub fn validate(&self) -> Result<()> {
        if let PartitionTree::Split(cube, ch) = self {
            let expected = cube.children()?;
            if ch.len() != expected.len() || ch.iter().zip(&expected).any(|(t, e)| t.cube() != e) {
                return Err(Error::InvalidInput(format!(
                    "split node {cube:?} does not hold its dyadic children"
                )));
            }
            ch.iter().try_for_each(|c| c.validate())?;
        }
        Ok(())
    }

    /// Leaf set as a partition of the root cube; the root must be
    /// `[0,1]^D`.
    pub fn to_partition(&self) -> Result<Partition> {
        if self.cube().level() != 0 {
            return Err(Error::InvalidInput("tree root is not [0,1]^D".into()));
        }
        self.validate()?;
        Ok(Partition {
            dim: self.cube().dim() as u8,
            cells: self.leaves(),
        })
    }
}

/// A partition of `[0,1]^D` into dyadic cubes reachable by recursive
/// splitting. Cells are kept in the depth-first leaf order of the split
/// tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TreeForm", try_from = "TreeForm")]
pub struct Partition {
    dim: u8,
    cells: Vec<DyadicCube>,
}

impl Partition {
    /// `{[0,1]^D}`.
    pub fn trivial(dim: usize) -> Self {
        Partition {
            dim: dim as u8,
            cells: vec![DyadicCube::root(dim)],
        }
    }

    /// The regular grid of all level-`level` cubes.
    pub fn regular(dim: usize, level: u32) -> Result<Self> {
        let count = 1u128 << (level as u128 * dim as u128).min(127);
        if level > DyadicCube::max_level(dim) || count > 1 << 26 {
            return Err(Error::Capacity(format!(
                "regular grid of level {level} too large"
            )));
        }
        Ok(Partition {
            dim: dim as u8,
            cells: (0..count as u64)
                .map(|code| DyadicCube::from_code(dim, level, code))
                .collect(),
        })
    }

    /// Validates an arbitrary cell set and returns it in canonical order.
    pub fn from_cells(dim: usize, cells: Vec<DyadicCube>) -> Result<Self> {
        partition_to_tree(dim, &cells)?.to_partition()
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn cells(&self) -> &[DyadicCube] {
        &self.cells
    }

    /// `|m|`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_level(&self) -> u32 {
        self.cells.iter().map(|c| c.level()).max().unwrap_or(0)
    }

    pub fn measure_sum(&self) -> f64 {
        self.cells.iter().map(|c| c.measure()).sum()
    }

    pub fn to_tree(&self) -> PartitionTree {
        partition_to_tree(self.dim(), &self.cells).expect("partition invariant violated")
    }

    /// Index of the cell containing `point`.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains_point(point))
    }

    pub fn to_flat(&self) -> FlatForm {
        FlatForm {
            dim: self.dim(),
            cells: self
                .cells
                .iter()
                .map(|c| CellForm {
                    j: c.level(),
                    l: c.l(),
                })
                .collect(),
        }
    }

    pub fn from_flat(flat: &FlatForm) -> Result<Self> {
        let cells = flat
            .cells
            .iter()
            .map(|c| {
                if c.l.len() != flat.dim {
                    return Err(Error::InvalidInput(format!(
                        "cell index vector has {} entries, expected {}",
                        c.l.len(),
                        flat.dim
                    )));
                }
                DyadicCube::new(c.j, &c.l)
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::from_cells(flat.dim, cells)
    }
}

/// Leaf set of `tree`, validated.
pub fn tree_to_partition(tree: &PartitionTree) -> Result<Partition> {
    tree.to_partition()
}

/// Rebuilds the split tree whose leaves are `cells`. Fails when the cells
/// overlap, leave gaps, or have mixed dimension.
pub fn partition_to_tree(dim: usize, cells: &[DyadicCube]) -> Result<PartitionTree> {
    if cells.iter().any(|c| c.dim() != dim) {
        return Err(Error::InvalidInput("cells of mixed dimension".into()));
    }
    let mut seen = HashSet::with_capacity(cells.len());
    if !cells.iter().all(|c| seen.insert(*c)) {
        return Err(Error::InvalidInput("duplicate cell in partition".into()));
    }
    build_subtree(DyadicCube::root(dim), cells.to_vec())
}

fn build_subtree(node: DyadicCube, cells: Vec<DyadicCube>) -> Result<PartitionTree> {
    match cells.as_slice() {
        [] => Err(Error::InvalidInput(format!(
            "cells do not cover {node:?}: not a partition"
        ))),
        [only] if *only == node => Ok(PartitionTree::Leaf(node)),
        _ => {
            if cells.contains(&node) {
                return Err(Error::InvalidInput(format!(
                    "cell {node:?} overlaps finer cells"
                )));
            }
            let children = node.children()?;
            let mut buckets: Vec<Vec<DyadicCube>> = vec![Vec::new(); children.len()];
            let level = node.level() + 1;
            for c in cells {
                let anc = c.ancestor(level);
                let slot = children
                    .iter()
                    .position(|ch| *ch == anc)
                    .expect("cell outside its ancestor");
                buckets[slot].push(c);
            }
            let sub = children
                .into_iter()
                .zip(buckets)
                .map(|(ch, b)| build_subtree(ch, b))
                .collect::<Result<Vec<_>>>()?;
            Ok(PartitionTree::Split(node, sub))
        }
    }
}

/// `|M_ℓ|` for cubes of dimension `dim`: `c(0) = 1`,
/// `c(ℓ) = 1 + c(ℓ-1)^{2^dim}`. `None` on overflow.
pub fn partition_count(level: u32, dim: usize) -> Option<u128> {
    let fanout = 1u32.checked_shl(dim as u32)?;
    let mut c: u128 = 1;
    for _ in 0..level {
        c = c.checked_pow(fanout)?.checked_add(1)?;
    }
    Some(c)
}

/// Every partition of `[0,1]^{2d}` with depth at most `level`, each once.
/// Intended as a brute-force oracle; refuses collections larger than
/// [`ENUMERATION_LIMIT`].
pub fn enumerate_partitions(level: u32, d: usize) -> Result<Vec<Partition>> {
    let dim = 2 * d;
    match partition_count(level, dim) {
        Some(c) if c <= ENUMERATION_LIMIT => {}
        _ => {
            return Err(Error::Capacity(format!(
                "|M_{level}| for d={d} exceeds the enumeration limit {ENUMERATION_LIMIT}"
            )))
        }
    }
    Ok(enumerate_leaf_sets(DyadicCube::root(dim), level)
        .into_iter()
        .map(|cells| Partition {
            dim: dim as u8,
            cells,
        })
        .collect())
}

fn enumerate_leaf_sets(cube: DyadicCube, remaining: u32) -> Vec<Vec<DyadicCube>> {
    let mut out = vec![vec![cube]];
    if remaining == 0 {
        return out;
    }
    let per_child: Vec<Vec<Vec<DyadicCube>>> = (0..cube.child_count())
        .map(|c| enumerate_leaf_sets(cube.child_unchecked(c), remaining - 1))
        .collect();
    let mut acc: Vec<Vec<DyadicCube>> = vec![Vec::new()];
    for options in &per_child {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for prefix in &acc {
            for opt in options {
                let mut v = Vec::with_capacity(prefix.len() + opt.len());
                v.extend_from_slice(prefix);
                v.extend_from_slice(opt);
                next.push(v);
            }
        }
        acc = next;
    }
    out.extend(acc);
    out
}

/// Nested-split-flag JSON form of a partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeForm {
    pub dim: usize,
    pub root: NodeForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeForm {
    pub split: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeForm>,
}

/// Flat JSON form: the list of `{j, l}` cells (1-based `l`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatForm {
    pub dim: usize,
    pub cells: Vec<CellForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellForm {
    pub j: u32,
    pub l: Vec<u64>,
}

impl From<&PartitionTree> for NodeForm {
    fn from(t: &PartitionTree) -> Self {
        match t {
            PartitionTree::Leaf(_) => NodeForm {
                split: false,
                children: Vec::new(),
            },
            PartitionTree::Split(_, ch) => NodeForm {
                split: true,
                children: ch.iter().map(NodeForm::from).collect(),
            },
        }
    }
}

impl From<Partition> for TreeForm {
    fn from(m: Partition) -> Self {
        TreeForm {
            dim: m.dim(),
            root: NodeForm::from(&m.to_tree()),
        }
    }
}

fn node_to_tree(cube: DyadicCube, node: &NodeForm) -> Result<PartitionTree> {
    if !node.split {
        if !node.children.is_empty() {
            return Err(Error::InvalidInput("leaf node with children".into()));
        }
        return Ok(PartitionTree::Leaf(cube));
    }
    let children = cube.children()?;
    if node.children.len() != children.len() {
        return Err(Error::InvalidInput(format!(
            "split node has {} children, expected {}",
            node.children.len(),
            children.len()
        )));
    }
    let sub = children
        .into_iter()
        .zip(&node.children)
        .map(|(c, n)| node_to_tree(c, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionTree::Split(cube, sub))
}

impl TryFrom<TreeForm> for Partition {
    type Error = Error;

    fn try_from(t: TreeForm) -> Result<Self> {
        if t.dim == 0 || t.dim > 62 {
            return Err(Error::InvalidInput(format!(
                "dimension {} not in 1..=62",
                t.dim
            )));
        }
        node_to_tree(DyadicCube::root(t.dim), &t.root)?.to_partition()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(level: u32, l: &[u64]) -> DyadicCube {
        DyadicCube::new(level, l).unwrap()
    }

    #[test]
    fn root_splits_into_quadrants() {
        let ch = DyadicCube::root(2).children().unwrap();
        let ls: Vec<_> = ch.iter().map(|c| c.l()).collect();
        assert_eq!(ls, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert!(ch.iter().all(|c| c.level() == 1));
    }

    #[test]
    fn children_index_arithmetic() {
        let ch = cube(1, &[1, 1]).children().unwrap();
        let ls: Vec<_> = ch.iter().map(|c| (c.level(), c.l())).collect();
        assert_eq!(
            ls,
            vec![
                (2, vec![1, 1]),
                (2, vec![1, 2]),
                (2, vec![2, 1]),
                (2, vec![2, 2])
            ]
        );
        let ch = cube(1, &[2, 1]).children().unwrap();
        assert_eq!(ch[3].l(), vec![4, 2]);
    }

    #[test]
    fn children_measures_add_up() {
        for dim in 1..=4 {
            let mut c = DyadicCube::root(dim);
            for _ in 0..3 {
                let ch = c.children().unwrap();
                let sum: f64 = ch.iter().map(|k| k.measure()).sum();
                assert_eq!(sum, c.measure());
                c = ch[ch.len() - 1];
            }
        }
    }

    #[test]
    fn level_overflow_is_a_capacity_error() {
        let c = DyadicCube::from_code(2, DyadicCube::max_level(2), 0);
        assert!(matches!(c.children(), Err(Error::Capacity(_))));
        assert!(matches!(
            DyadicCube::new(40, &[1, 1]),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn intersect_examples() {
        let root = DyadicCube::root(2);
        let k = cube(2, &[3, 1]);
        assert_eq!(intersect(&root, &k), Some(k));
        assert_eq!(intersect(&k, &root), Some(k));
        assert_eq!(intersect(&cube(1, &[1, 1]), &cube(1, &[2, 1])), None);
        let deep = cube(2, &[2, 2]);
        assert_eq!(intersect(&cube(1, &[1, 1]), &deep), Some(deep));
    }

    #[test]
    fn nesting_law_exhaustive_up_to_level_3() {
        let mut all = Vec::new();
        for level in 0..=3u32 {
            for code in 0..(1u64 << (2 * level)) {
                all.push(DyadicCube::from_code(2, level, code));
            }
        }
        for a in &all {
            for b in &all {
                // Overlap measured on a level-3 grid must agree with intersect.
                let shared = (0..64u64)
                    .map(|code| DyadicCube::from_code(2, 3, code))
                    .filter(|g| {
                        (a.contains(g) || g.contains(a)) && (b.contains(g) || g.contains(b))
                    })
                    .count();
                match intersect(a, b) {
                    Some(c) => {
                        assert!(c == *a || c == *b);
                        assert!(shared > 0);
                    }
                    None => assert_eq!(shared, 0, "{a:?} {b:?}"),
                }
            }
        }
    }

    #[test]
    fn interval_boundaries() {
        let last = DyadicInterval::new(3, 8).unwrap();
        assert!(last.contains(1.0));
        assert!(!DyadicInterval::new(3, 7).unwrap().contains(0.875));
        assert!(last.contains(0.875));
        assert!(DyadicInterval::new(1, 1).unwrap().contains(0.0));
        assert!(!DyadicInterval::new(1, 1).unwrap().contains(0.5));
        assert_eq!(locate(-0.1, 2), None);
        assert_eq!(locate(1.0 + 1e-12, 2), None);
        assert_eq!(locate(f64::NAN, 2), None);
        for level in 0..10 {
            assert_eq!(locate(1.0, level), Some((1 << level) - 1));
        }
        assert_eq!(DyadicInterval::containing(0.3, 2).unwrap().l(), 2);
        assert!(DyadicInterval::new(2, 5).is_err());
    }

    #[test]
    fn point_lies_in_exactly_one_cube_per_level() {
        let pts = [[0.0, 1.0], [0.5, 0.5], [1.0, 1.0], [0.25, 0.75], [0.3, 0.9]];
        for p in &pts {
            for level in 0..=4u32 {
                let hits = (0..(1u64 << (2 * level)))
                    .filter(|&code| DyadicCube::from_code(2, level, code).contains_point(p))
                    .count();
                assert_eq!(hits, 1);
                let c = DyadicCube::containing(p, level).unwrap();
                assert!(c.contains_point(p));
            }
        }
    }

    #[test]
    fn projections() {
        let k = cube(2, &[3, 2]);
        assert_eq!(k.x_part().l(), vec![3]);
        assert_eq!(k.y_part().l(), vec![2]);
        assert_eq!(k.y_part().measure(), 0.25);
        let k4 = cube(1, &[1, 2, 2, 1]);
        assert_eq!(k4.x_part().l(), vec![1, 2]);
        assert_eq!(k4.y_part().l(), vec![2, 1]);
        assert_eq!(k4.y_part().measure(), 0.25);
    }

    #[test]
    fn trivial_and_quadrant_bijection() {
        let t = PartitionTree::Leaf(DyadicCube::root(2));
        assert_eq!(t.to_partition().unwrap(), Partition::trivial(2));
        assert_eq!(Partition::trivial(2).to_tree(), t);

        let root = DyadicCube::root(2);
        let split = PartitionTree::Split(
            root,
            root.children()
                .unwrap()
                .into_iter()
                .map(PartitionTree::Leaf)
                .collect(),
        );
        let m = split.to_partition().unwrap();
        assert_eq!(m, Partition::regular(2, 1).unwrap());
        assert_eq!(m.to_tree(), split);
    }

    #[test]
    fn rejects_non_partitions() {
        let q = DyadicCube::root(2).children().unwrap();
        // gap
        assert!(Partition::from_cells(2, q[..3].to_vec()).is_err());
        // overlap
        let mut v = q.clone();
        v.push(q[0].children().unwrap()[0]);
        assert!(Partition::from_cells(2, v).is_err());
        // duplicate
        let mut v = q.clone();
        v.push(q[1]);
        assert!(Partition::from_cells(2, v).is_err());
        // reordered input is canonicalized
        let mut v = q.clone();
        v.reverse();
        assert_eq!(Partition::from_cells(2, v).unwrap().cells(), &q[..]);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_partitions(1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_partitions(2, 1).unwrap().len(), 17);
        assert_eq!(partition_count(3, 2), Some(83522));
        assert!(matches!(
            enumerate_partitions(4, 1),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            enumerate_partitions(3, 2),
            Err(Error::Capacity(_))
        ));
        assert_eq!(enumerate_partitions(2, 2).unwrap().len(), 65_537);
    }

    #[test]
    fn enumeration_level_3_is_exhaustive_and_valid() {
        let all = enumerate_partitions(3, 1).unwrap();
        assert_eq!(all.len(), 83522);
        let distinct: HashSet<_> = all.iter().map(|m| m.cells().to_vec()).collect();
        assert_eq!(distinct.len(), all.len());
        for m in all.iter().step_by(97) {
            assert!((m.measure_sum() - 1.0).abs() <= 1e-12);
            assert!(m.max_level() <= 3);
            assert_eq!(&Partition::from_cells(2, m.cells().to_vec()).unwrap(), m);
        }
    }

    #[test]
    fn enumerated_partitions_are_disjoint_with_unit_measure() {
        for m in enumerate_partitions(2, 1).unwrap() {
            assert!((m.measure_sum() - 1.0).abs() <= 1e-12);
            for (i, a) in m.cells().iter().enumerate() {
                for b in &m.cells()[i + 1..] {
                    assert_eq!(intersect(a, b), None);
                }
            }
        }
    }

    #[test]
    fn json_forms_round_trip() {
        let m = enumerate_partitions(2, 1).unwrap().swap_remove(9);
        let json = serde_json::to_string(&m).unwrap();
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let flat = serde_json::to_string(&m.to_flat()).unwrap();
        let back = Partition::from_flat(&serde_json::from_str(&flat).unwrap()).unwrap();
        assert_eq!(back, m);
        let leaf: Partition = serde_json::from_str(r#"{"dim":2,"root":{"split":false}}"#).unwrap();
        assert_eq!(leaf, Partition::trivial(2));
        assert!(serde_json::from_str::<Partition>(
            r#"{"dim":2,"root":{"split":true,"children":[{"split":false}]}}"#
        )
        .is_err());
    }

    fn arb_tree(dim: usize, max_depth: u32) -> impl Strategy<Value = PartitionTree> {
        // A random split-probability per tree plus a deterministic stream of
        // coin flips keeps the generator simple and shrinkable.
        (0.0f64..0.9, any::<u64>()).prop_map(move |(p, seed)| {
            let mut state = seed;
            grow(DyadicCube::root(dim), max_depth, p, &mut state)
        })
    }

    fn grow(cube: DyadicCube, remaining: u32, p: f64, state: &mut u64) -> PartitionTree {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = (*state >> 11) as f64 / (1u64 << 53) as f64;
        if remaining == 0 || u >= p {
            PartitionTree::Leaf(cube)
        } else {
            PartitionTree::Split(
                cube,
                (0..cube.child_count())
                    .map(|c| grow(cube.child_unchecked(c), remaining - 1, p, state))
                    .collect(),
            )
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn tree_partition_round_trip(tree in arb_tree(2, 4)) {
            let m = tree_to_partition(&tree).unwrap();
            prop_assert_eq!(m.len(), tree.leaf_count());
            prop_assert!((m.measure_sum() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(&m.to_tree(), &tree);
            let json = serde_json::to_string(&m).unwrap();
            prop_assert_eq!(serde_json::from_str::<Partition>(&json).unwrap(), m);
        }

        #[test]
        fn round_trip_in_four_dimensions(tree in arb_tree(4, 2)) {
            let m = tree.to_partition().unwrap();
            prop_assert_eq!(m.to_tree(), tree);
        }
    }
}
