//! The itemset lattice: patterns, tid-lists, canonical children and the
//! per-node discrepancy statistics that drive pruning.
//!
//! A pattern `P` is read as the indicator `f_P(s) = 1 iff P ⊆ s`, so the
//! family is binary and non-negative: `Ψ̃_f = supp(P)`, `Ψ̂_{f,j}` is the
//! number of supporting transactions with a `+1` sign in row `j`, and
//! `Δ_{f,j} = 2·Ψ̂_{f,j} − supp(P)`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{ItemId, SampleDataset};
use crate::rademacher::RademacherMatrix;

/// A sorted, duplicate-free itemset. The empty pattern is the lattice root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Pattern(Vec<ItemId>);

impl Pattern {
    /// Sorts and deduplicates `items`.
    pub fn new(mut items: Vec<ItemId>) -> Self {
        items.sort_unstable();
        items.dedup();
        Pattern(items)
    }

    pub fn root() -> Self {
        Pattern(Vec::new())
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ⊆ other`, the order relation of the family.
    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        crate::dataset::is_sorted_subset(&self.0, &other.0)
    }

    /// The parent this pattern is generated from: drop the largest item.
    pub fn canonical_parent(&self) -> Option<Pattern> {
        let (_, rest) = self.0.split_last()?;
        Some(Pattern(rest.to_vec()))
    }

    fn extended(&self, item: ItemId) -> Pattern {
        let mut items = Vec::with_capacity(self.0.len() + 1);
        items.extend_from_slice(&self.0);
        items.push(item);
        Pattern(items)
    }
}

impl From<Vec<ItemId>> for Pattern {
    fn from(items: Vec<ItemId>) -> Self {
        Pattern::new(items)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    pub pattern: Pattern,
    /// Sorted indices of the transactions containing `pattern`.
    pub tidlist: Vec<u32>,
}

impl PatternNode {
    pub fn support(&self) -> usize {
        self.tidlist.len()
    }
}

/// Raw integer sums for one node and one sign row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyStats {
    /// `Δ_{f,j} = Σ_i σ_{j,i} f(s_i)`.
    pub delta: i64,
    /// Bound on `Δ` of the node and all its descendants that uses the signs.
    pub psi_hat: i64,
    /// Sign-free bound `Σ_i |f(s_i)|`.
    pub psi_tilde: i64,
}

/// Vertical view of a dataset: one tid-list per alphabet item.
#[derive(Debug, Clone)]
pub struct Lattice<'a> {
    ds: &'a SampleDataset,
    item_tids: Vec<Vec<u32>>,
}

impl<'a> Lattice<'a> {
    pub fn new(ds: &'a SampleDataset) -> Self {
        let alphabet = ds.alphabet();
        let mut item_tids = alloc::vec![Vec::new(); alphabet.len()];
        for (tid, t) in ds.transactions().iter().enumerate() {
            for item in t {
                let pos = alphabet.binary_search(item).expect("alphabet covers every item");
                item_tids[pos].push(tid as u32);
            }
        }
        Lattice { ds, item_tids }
    }

    pub fn dataset(&self) -> &'a SampleDataset {
        self.ds
    }

    pub fn alphabet(&self) -> &'a [ItemId] {
        self.ds.alphabet()
    }

    /// Tid-list of the alphabet item at position `pos`.
    pub fn item_tidlist(&self, pos: usize) -> &[u32] {
        &self.item_tids[pos]
    }

    /// The minimal elements: only the empty pattern, supported everywhere.
    pub fn minimals(&self) -> Vec<PatternNode> {
        alloc::vec![PatternNode { pattern: Pattern::root(), tidlist: (0..self.ds.m() as u32).collect() }]
    }

    /// Canonical children: one extension per alphabet item larger than the
    /// node's largest item. Zero-support children are included.
    pub fn children(&self, node: &PatternNode) -> Vec<PatternNode> {
        let start = self.first_extension(&node.pattern);
        (start..self.item_tids.len())
            .map(|pos| {
                let mut tidlist = Vec::new();
                intersect_into(&node.tidlist, &self.item_tids[pos], &mut tidlist);
                PatternNode { pattern: node.pattern.extended(self.alphabet()[pos]), tidlist }
            })
            .collect()
    }

    /// Alphabet position of the first item that may extend `pattern`.
    pub(crate) fn first_extension(&self, pattern: &Pattern) -> usize {
        match pattern.items().last() {
            None => 0,
            Some(last) => match self.alphabet().binary_search(last) {
                Ok(p) => p + 1,
                Err(p) => p,
            },
        }
    }

    /// Every non-empty pattern with support at least `min_support` (≥ 1),
    /// with its support, in depth-first canonical order.
    pub fn frequent_patterns(&self, min_support: usize) -> Vec<(Pattern, usize)> {
        let min_support = min_support.max(1);
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<u32>, Vec<ItemId>, usize)> = Vec::new();
        let root_tids: Vec<u32> = (0..self.ds.m() as u32).collect();
        if root_tids.len() >= min_support {
            stack.push((root_tids, Vec::new(), 0));
        }
        while let Some((tids, items, start)) = stack.pop() {
            for pos in (start..self.item_tids.len()).rev() {
                if self.item_tids[pos].len() < min_support {
                    continue;
                }
                let mut child = Vec::new();
                intersect_into(&tids, &self.item_tids[pos], &mut child);
                if child.len() >= min_support {
                    let mut child_items = items.clone();
                    child_items.push(self.alphabet()[pos]);
                    out.push((Pattern(child_items.clone()), child.len()));
                    stack.push((child, child_items, pos + 1));
                }
            }
        }
        out
    }

    /// Number of non-empty patterns with support at least `min_support`
    /// (≥ 1), counting stops once it exceeds `cap`.
    pub(crate) fn count_frequent_capped(&self, min_support: usize, cap: usize) -> usize {
        let min_support = min_support.max(1);
        if self.ds.m() < min_support {
            return 0;
        }
        let mut count = 0usize;
        let mut stack: Vec<(Vec<u32>, usize)> = alloc::vec![((0..self.ds.m() as u32).collect(), 0)];
        while let Some((tids, start)) = stack.pop() {
            for pos in start..self.item_tids.len() {
                if self.item_tids[pos].len() < min_support {
                    continue;
                }
                let mut child = Vec::new();
                intersect_into(&tids, &self.item_tids[pos], &mut child);
                if child.len() >= min_support {
                    count += 1;
                    if count > cap {
                        return count;
                    }
                    stack.push((child, pos + 1));
                }
            }
        }
        count
    }
}

/// `minimals` without keeping the vertical index around.
pub fn minimals(ds: &SampleDataset) -> Vec<PatternNode> {
    Lattice::new(ds).minimals()
}

/// `children` without keeping the vertical index around.
pub fn children(node: &PatternNode, ds: &SampleDataset) -> Vec<PatternNode> {
    Lattice::new(ds).children(node)
}

/// `Δ`, `Ψ̂`, `Ψ̃` of `node` for sign row `j`.
pub fn node_discrepancy_stats(node: &PatternNode, mat: &RademacherMatrix, j: usize) -> DiscrepancyStats {
    let pos = mat.pos_count_unchecked(j, &node.tidlist) as i64;
    let supp = node.support() as i64;
    DiscrepancyStats { delta: 2 * pos - supp, psi_hat: pos, psi_tilde: supp }
}

/// Sorted intersection of two sorted tid-lists, written into `out`.
pub fn intersect_into(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.is_empty() {
        return;
    }
    if large.len() / small.len() >= 32 {
        let mut rest = large;
        for &x in small {
            match rest.binary_search(&x) {
                Ok(p) => {
                    out.push(x);
                    rest = &rest[p + 1..];
                }
                Err(p) => rest = &rest[p..],
            }
            if rest.is_empty() {
                break;
            }
        }
        return;
    }
    let (mut i, mut j) = (0, 0);
    while i < small.len() && j < large.len() {
        match small[i].cmp(&large[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(small[i]);
                i += 1;
                j += 1;
            }
        }
    }
}
