//! Branch-and-bound computation of the per-row discrepancy suprema.
//!
//! For each sign row `j` the engine finds `ν_j = sup_f Δ_{f,j}` over the
//! admitted patterns without enumerating the lattice. Nodes leave the queue in
//! an order where every canonical parent precedes its children. A popped node
//! keeps row `j` alive only while its bounds can still beat `ν_j`:
//!
//! * `Ψ̃_f ≤ ν_j`: neither `f` nor any descendant can exceed `ν_j`, skip the row.
//! * otherwise evaluate `Ψ̂_{f,j}` and `Δ_{f,j}`, update `ν_j`, and pass the row
//!   on to the children only if `Ψ̂_{f,j} > ν_j`.
//!
//! Children inherit the surviving rows of their canonical parent and are not
//! queued at all when their support already rules out every inherited row.

use alloc::collections::{BTreeSet, BinaryHeap, VecDeque};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::centralize_mcera;
use crate::dataset::{min_support_for, ItemId, SampleDataset};
use crate::error::Error;
use crate::lattice::{intersect_into, Lattice, Pattern};
use crate::rademacher::RademacherMatrix;

/// Exploration order of the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Largest support first; ties by shorter pattern, then lexicographic.
    #[default]
    SupportDesc,
    /// First in, first out.
    Bfs,
    /// Last in, first out; siblings pop in descending support. The queue
    /// stays proportional to depth times branching.
    Dfs,
}

/// Which traversed patterns take part in the suprema.
/// Predicate on (items, support).
pub type PatternPredicate = Arc<dyn Fn(&[ItemId], usize) -> bool + Send + Sync>;

#[derive(Clone, Default)]
pub enum Admission {
    #[default]
    All,
    /// Only patterns whose support is strictly below the bound.
    SupportBelow(usize),
    /// Arbitrary predicate on (items, support).
    Predicate(PatternPredicate),
}

impl Admission {
    fn admits(&self, items: &[ItemId], support: usize) -> bool {
        match self {
            Admission::All => true,
            Admission::SupportBelow(bound) => support < *bound,
            Admission::Predicate(p) => p(items, support),
        }
    }
}

impl fmt::Debug for Admission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admission::All => f.write_str("All"),
            Admission::SupportBelow(b) => f.debug_tuple("SupportBelow").field(b).finish(),
            Admission::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EngineConfig {
    pub order: Order,
    /// Whether the empty pattern (frequency 1) takes part in the suprema.
    pub include_root_in_sup: bool,
    pub admission: Admission,
    /// Stop after processing this many nodes.
    pub max_nodes: Option<usize>,
    /// Traverse only patterns with frequency at least this value. Values
    /// above 1 leave only the empty pattern.
    pub beta_floor: Option<f64>,
}

impl EngineConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.max_nodes == Some(0) {
            return Err(Error::Config("max_nodes must be at least 1"));
        }
        if let Some(b) = self.beta_floor {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::Config("beta_floor must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEraResult {
    /// Per-row suprema of the raw discrepancy, `-m` when nothing was admitted.
    pub nu_raw: Vec<i64>,
    /// `Σ_j ν_j / (n·m)`.
    pub mcera: f64,
    /// The same average for the family shifted by `-1/2`.
    pub centralized_mcera: f64,
    pub nodes_explored: usize,
    /// No admitted pattern was processed; `nu_raw` holds the sentinel.
    pub empty_family: bool,
    /// The node cap stopped the search before the queue drained.
    pub truncated: bool,
    /// Frequency of the last processed node when truncated.
    pub beta_effective: Option<f64>,
    pub m: usize,
    pub n: usize,
}

/// One row decision taken at a popped node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTrace {
    pub row: usize,
    pub delta: i64,
    pub psi_hat: i64,
    /// The row was passed on to the children.
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub pattern: Pattern,
    pub support: usize,
    pub admitted: bool,
    /// Rows whose bounds were evaluated at this node.
    pub rows: Vec<RowTrace>,
}

struct Entry {
    support: usize,
    items: Vec<u32>,
    tids: Vec<u32>,
    rows: Vec<u32>,
}

impl Entry {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.support
            .cmp(&other.support)
            .then_with(|| other.items.len().cmp(&self.items.len()))
            .then_with(|| other.items.cmp(&self.items))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

enum Queue {
    Heap(BinaryHeap<Entry>),
    Fifo(VecDeque<Entry>),
    Lifo(Vec<Entry>),
}

impl Queue {
    fn new(order: Order) -> Self {
        match order {
            Order::SupportDesc => Queue::Heap(BinaryHeap::new()),
            Order::Bfs => Queue::Fifo(VecDeque::new()),
            Order::Dfs => Queue::Lifo(Vec::new()),
        }
    }
    fn push(&mut self, e: Entry) {
        match self {
            Queue::Heap(h) => h.push(e),
            Queue::Fifo(q) => q.push_back(e),
            Queue::Lifo(v) => v.push(e),
        }
    }
    fn pop(&mut self) -> Option<Entry> {
        match self {
            Queue::Heap(h) => h.pop(),
            Queue::Fifo(q) => q.pop_front(),
            Queue::Lifo(v) => v.pop(),
        }
    }
}

/// Exact per-row suprema of the discrepancy over the admitted patterns.
pub fn get_n_mcera(ds: &SampleDataset, mat: &RademacherMatrix, cfg: &EngineConfig) -> Result<McEraResult, Error> {
    run(ds, mat, cfg, None)
}

/// [`get_n_mcera`] that also records every popped node and row decision.
pub fn get_n_mcera_traced(
    ds: &SampleDataset,
    mat: &RademacherMatrix,
    cfg: &EngineConfig,
) -> Result<(McEraResult, Vec<TraceEntry>), Error> {
    let mut trace = Vec::new();
    let res = run(ds, mat, cfg, Some(&mut trace))?;
    Ok((res, trace))
}

fn run(
    ds: &SampleDataset,
    mat: &RademacherMatrix,
    cfg: &EngineConfig,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<McEraResult, Error> {
    cfg.validate()?;
    let m = ds.m();
    if mat.m() != m {
        return Err(Error::Dimension { expected: m, found: mat.m() });
    }
    let n = mat.n();
    let lattice = Lattice::new(ds);
    let alphabet = ds.alphabet();
    let floor = cfg.beta_floor.map_or(0, |b| min_support_for(b, m));
    let words = mat.words_per_row();

    let mut nu = vec![-(m as i64); n];
    let mut queue = Queue::new(cfg.order);
    queue.push(Entry { support: m, items: Vec::new(), tids: (0..m as u32).collect(), rows: (0..n as u32).collect() });

    let mut processed = 0usize;
    let mut any_admitted = false;
    let mut truncated = false;
    let mut last_support = m;
    let mut mask = vec![0u64; words];
    let mut child_tids = Vec::new();
    let mut item_buf: Vec<ItemId> = Vec::new();
    let mut siblings: Vec<Entry> = Vec::new();

    while let Some(entry) = queue.pop() {
        if cfg.max_nodes.is_some_and(|k| processed >= k) {
            truncated = true;
            break;
        }
        processed += 1;
        last_support = entry.support;
        let supp = entry.support as i64;

        item_buf.clear();
        item_buf.extend(entry.items.iter().map(|&p| alphabet[p as usize]));
        let is_root = entry.items.is_empty();
        let admitted = (!is_root || cfg.include_root_in_sup) && cfg.admission.admits(&item_buf, entry.support);
        any_admitted |= admitted;

        // Bitmask path when the tid-list is dense over its word span.
        let span = match (entry.tids.first(), entry.tids.last()) {
            (Some(&a), Some(&b)) => Some((a as usize / 64, b as usize / 64 + 1)),
            _ => None,
        };
        let use_mask = span.is_some_and(|(lo, hi)| hi - lo < entry.tids.len() / 2);
        if use_mask {
            for &t in &entry.tids {
                mask[t as usize / 64] |= 1 << (t % 64);
            }
        }

        let mut keep: Vec<u32> = Vec::with_capacity(entry.rows.len());
        let mut row_trace = Vec::new();
        for &j in &entry.rows {
            let ju = j as usize;
            if supp <= nu[ju] {
                continue;
            }
            let pos = match (use_mask, span) {
                (true, Some((lo, hi))) => mat.pos_count_masked(ju, &mask, lo, hi),
                _ => mat.pos_count_unchecked(ju, &entry.tids),
            } as i64;
            let delta = 2 * pos - supp;
            debug_assert!(delta <= pos && pos <= supp);
            if pos > nu[ju] && admitted && delta > nu[ju] {
                nu[ju] = delta;
            }
            let kept = pos > nu[ju];
            if kept {
                keep.push(j);
            }
            if trace.is_some() {
                row_trace.push(RowTrace { row: ju, delta, psi_hat: pos, kept });
            }
        }
        if use_mask {
            if let Some((lo, hi)) = span {
                mask[lo..hi].iter_mut().for_each(|w| *w = 0);
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEntry {
                pattern: Pattern::new(item_buf.clone()),
                support: entry.support,
                admitted,
                rows: row_trace,
            });
        }
        if keep.is_empty() {
            continue;
        }

        let start = entry.items.last().map_or(0, |&p| p as usize + 1);
        for p in start..alphabet.len() {
            let item_tids = lattice.item_tidlist(p);
            if item_tids.len() < floor {
                continue;
            }
            intersect_into(&entry.tids, item_tids, &mut child_tids);
            let child_supp = child_tids.len();
            if child_supp < floor {
                continue;
            }
            let rows: Vec<u32> = keep.iter().copied().filter(|&j| child_supp as i64 > nu[j as usize]).collect();
            if rows.is_empty() {
                continue;
            }
            let mut items = Vec::with_capacity(entry.items.len() + 1);
            items.extend_from_slice(&entry.items);
            items.push(p as u32);
            siblings.push(Entry { support: child_supp, items, tids: core::mem::take(&mut child_tids), rows });
        }
        if cfg.order == Order::Dfs {
            siblings.sort_unstable();
        }
        siblings.drain(..).for_each(|e| queue.push(e));
    }

    let total: i64 = nu.iter().sum();
    let denom = (n * m) as f64;
    Ok(McEraResult {
        mcera: total as f64 / denom,
        centralized_mcera: centralize_mcera(&nu, mat.row_sums(), 1.0, n, m),
        nu_raw: nu,
        nodes_explored: processed,
        empty_family: !any_admitted,
        truncated,
        beta_effective: truncated.then(|| last_support as f64 / m as f64),
        m,
        n,
    })
}

/// True iff every traced node's canonical parent was popped before it.
pub fn verify_parent_first_order(trace: &[TraceEntry]) -> bool {
    let mut seen: BTreeSet<&Pattern> = BTreeSet::new();
    let parents: Vec<Option<Pattern>> = trace.iter().map(|e| e.pattern.canonical_parent()).collect();
    for (entry, parent) in trace.iter().zip(&parents) {
        if let Some(parent) = parent {
            if !seen.contains(parent) {
                return false;
            }
        }
        seen.insert(&entry.pattern);
    }
    true
}
