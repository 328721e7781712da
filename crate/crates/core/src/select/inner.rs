//! `SUP_K = sup_{m'} Σ_{K'∈m'} F_K(K') − w |m' ∨ K|` by a tree program.
//!
//! Cubes of `m'` that are disjoint from `K` contribute nothing, so the only
//! cubes whose choice matters are the descendants of `K` and the chain of
//! its ancestors. With `E*(K'')` the best value over split trees rooted at
//! `K''`:
//!
//! * below `K`: `E*(K'') = max(F_K(K'') − w, Σ_children E*)`, stopping at
//!   depth `ℓ`;
//! * on the ancestor chain: `E*(A) = max(F_K(A) − w, E*(next cube on the
//!   chain towards K))`, since every other child of `A` is disjoint from `K`.

use crate::loss::{hellinger2_cells, test_t_cells, CellPairScore, ALPHA};
use crate::partition::{DyadicCube, Partition, PartitionTree};
use crate::Result;

use super::Selector;

/// Optimal inner partition for one cube.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerDp {
    pub sup: f64,
    pub partition: Partition,
    pub visits: u64,
}

struct Ctx<'s, 'a> {
    sel: &'s Selector<'a>,
    k: DyadicCube,
    a: f64,
    visits: u64,
}

impl Ctx<'_, '_> {
    #[inline]
    fn score(&self, b: f64, s: &DyadicCube) -> f64 {
        let stats = self.sel.stats;
        let n = stats.n();
        let pair = CellPairScore {
            a: self.a,
            b,
            mass: stats.mass(s),
            transitions: stats.transitions(s) as f64,
        };
        ALPHA * hellinger2_cells(&pair, n) + test_t_cells(&pair, n)
    }

    /// Leaf value of a descendant `c ⊆ K`.
    #[inline]
    fn leaf_below(&self, c: &DyadicCube) -> f64 {
        self.score(self.sel.stats.cell_value(c), c) - self.sel.weight
    }

    /// Leaf value of an ancestor `A ⊇ K`; the intersection is `K` itself.
    #[inline]
    fn leaf_above(&self, anc: &DyadicCube) -> f64 {
        self.score(self.sel.stats.cell_value(anc), &self.k) - self.sel.weight
    }

    fn below(&mut self, c: DyadicCube) -> f64 {
        self.visits += 1;
        let leaf = self.leaf_below(&c);
        if c.level() >= self.sel.level {
            return leaf;
        }
        let mut split = 0.0;
        for i in 0..c.child_count() {
            split += self.below(c.child_unchecked(i));
        }
        leaf.max(split)
    }

    fn tree_below(&mut self, c: DyadicCube) -> (f64, PartitionTree) {
        self.visits += 1;
        let leaf = self.leaf_below(&c);
        if c.level() >= self.sel.level {
            return (leaf, PartitionTree::Leaf(c));
        }
        let mut split = 0.0;
        let mut children = Vec::with_capacity(c.child_count());
        for i in 0..c.child_count() {
            let (v, t) = self.tree_below(c.child_unchecked(i));
            split += v;
            children.push(t);
        }
        if leaf >= split {
            (leaf, PartitionTree::Leaf(c))
        } else {
            (split, PartitionTree::Split(c, children))
        }
    }
}

impl Selector<'_> {
    /// `SUP_K` and the number of cubes visited. `K` must be no deeper than
    /// the depth cap.
    pub fn inner_sup(&self, k: &DyadicCube) -> (f64, u64) {
        let mut ctx = Ctx {
            sel: self,
            k: *k,
            a: self.stats.cell_value(k),
            visits: 0,
        };
        let mut e = ctx.below(*k);
        for j in (0..k.level()).rev() {
            ctx.visits += 1;
            e = ctx.leaf_above(&k.ancestor(j)).max(e);
        }
        (e, ctx.visits)
    }

    /// `SUP_K` together with a maximizing partition `m'_K` of the whole
    /// square. Ties keep the coarser cube.
    pub fn inner_dp(&self, k: &DyadicCube) -> Result<InnerDp> {
        let mut ctx = Ctx {
            sel: self,
            k: *k,
            a: self.stats.cell_value(k),
            visits: 0,
        };
        let (below, subtree) = ctx.tree_below(*k);
        // chain[j] = (leaf value of the level-j ancestor, E* of that ancestor)
        let depth = k.level() as usize;
        let mut leaves = vec![0.0; depth];
        let mut best = vec![0.0; depth + 1];
        best[depth] = below;
        for j in (0..depth).rev() {
            ctx.visits += 1;
            leaves[j] = ctx.leaf_above(&k.ancestor(j as u32));
            best[j] = leaves[j].max(best[j + 1]);
        }
        let mut tree = subtree;
        for j in (0..depth).rev() {
            let anc = k.ancestor(j as u32);
            if leaves[j] >= best[j + 1] {
                tree = PartitionTree::Leaf(anc);
            } else {
                let on_chain = k.ancestor(j as u32 + 1);
                let children = (0..anc.child_count())
                    .map(|i| {
                        let c = anc.child_unchecked(i);
                        if c == on_chain {
                            std::mem::replace(&mut tree, PartitionTree::Leaf(c))
                        } else {
                            PartitionTree::Leaf(c)
                        }
                    })
                    .collect();
                tree = PartitionTree::Split(anc, children);
            }
        }
        Ok(InnerDp {
            sup: best[0],
            partition: tree.to_partition()?,
            visits: ctx.visits,
        })
    }
}
