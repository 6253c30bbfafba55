//! Brute-force references for tests: suprema by full enumeration, known
//! ground truths for false-positive checks, and a checker for the bound chain
//! along an engine trace.
//!
//! Nothing here uses the engine or the lattice; only the dataset and matrix
//! types are shared.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{ItemId, SampleDataset};
use crate::engine::TraceEntry;
use crate::error::Error;
use crate::lattice::Pattern;
use crate::rademacher::RademacherMatrix;
use crate::tfp::TfpResult;

/// Largest alphabet [`brute_mcera`] accepts.
pub const BRUTE_ALPHABET_CAP: usize = 15;

/// Per-row maxima of `Σ_i σ_{j,i}·1[f ⊆ s_i]` over every non-empty subset of
/// the alphabet, and the empty one when `include_root` is set.
pub fn brute_mcera(ds: &SampleDataset, mat: &RademacherMatrix, include_root: bool) -> Result<Vec<i64>, Error> {
    let k = ds.alphabet().len();
    if k > BRUTE_ALPHABET_CAP {
        return Err(Error::AlphabetTooLarge { size: k, cap: BRUTE_ALPHABET_CAP });
    }
    if mat.m() != ds.m() {
        return Err(Error::Dimension { expected: ds.m(), found: mat.m() });
    }
    // each transaction as a bitmask over alphabet positions
    let masks: Vec<u32> = ds
        .transactions()
        .iter()
        .map(|t| {
            t.iter()
                .map(|item| 1u32 << ds.alphabet().iter().position(|a| a == item).expect("item in alphabet"))
                .fold(0, |acc, b| acc | b)
        })
        .collect();
    let first = if include_root { 0u32 } else { 1 };
    let mut best = vec![i64::MIN; mat.n()];
    for f in first..(1u32 << k) {
        for (j, slot) in best.iter_mut().enumerate() {
            let d: i64 =
                masks.iter().enumerate().filter(|(_, &t)| t & f == f).map(|(i, _)| mat.sign(j, i) as i64).sum();
            *slot = (*slot).max(d);
        }
    }
    if first == 1 && k == 0 {
        // empty language: report the engine's sentinel
        best.iter_mut().for_each(|v| *v = -(ds.m() as i64));
    }
    Ok(best)
}

/// Per-row maxima of `Σ_i σ_{j,i}·(2·1[f ⊆ s_i] − 1)`, twice the discrepancy
/// of the family shifted by `-1/2`, by the same enumeration.
pub fn brute_shifted_mcera(ds: &SampleDataset, mat: &RademacherMatrix, include_root: bool) -> Result<Vec<i64>, Error> {
    let k = ds.alphabet().len();
    if k > BRUTE_ALPHABET_CAP {
        return Err(Error::AlphabetTooLarge { size: k, cap: BRUTE_ALPHABET_CAP });
    }
    if mat.m() != ds.m() || k == 0 && !include_root {
        return Err(Error::Dimension { expected: ds.m(), found: mat.m() });
    }
    let first = if include_root { 0usize } else { 1 };
    let mut best = vec![i64::MIN; mat.n()];
    for f in first..(1usize << k) {
        let items: Vec<ItemId> = (0..k).filter(|b| f >> b & 1 == 1).map(|b| ds.alphabet()[b]).collect();
        let inside: Vec<bool> = ds.transactions().iter().map(|t| items.iter().all(|x| t.contains(x))).collect();
        for (j, slot) in best.iter_mut().enumerate() {
            let d: i64 =
                inside.iter().enumerate().map(|(i, &yes)| mat.sign(j, i) as i64 * if yes { 1 } else { -1 }).sum();
            *slot = (*slot).max(d);
        }
    }
    Ok(best)
}

/// Where the true frequencies come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TruthSource {
    /// Items appear independently with the given probabilities.
    Bernoulli(Vec<(ItemId, f64)>),
    /// Uniform draws from a finite corpus.
    Corpus(SampleDataset),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub source: TruthSource,
    pub theta: f64,
}

impl GroundTruth {
    pub fn bernoulli(probs: Vec<(ItemId, f64)>, theta: f64) -> Result<Self, Error> {
        if probs.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Config("item probabilities must lie in [0, 1]"));
        }
        let mut probs = probs;
        probs.sort_by_key(|&(item, _)| item);
        probs.dedup_by_key(|&mut (item, _)| item);
        Ok(GroundTruth { source: TruthSource::Bernoulli(probs), theta })
    }

    pub fn corpus(ds: SampleDataset, theta: f64) -> Result<Self, Error> {
        if ds.is_empty() {
            return Err(Error::EmptySource);
        }
        Ok(GroundTruth { source: TruthSource::Corpus(ds), theta })
    }

    pub fn true_frequency(&self, pattern: &Pattern) -> f64 {
        match &self.source {
            TruthSource::Bernoulli(probs) => pattern
                .items()
                .iter()
                .map(|item| probs.binary_search_by_key(item, |&(i, _)| i).map_or(0.0, |p| probs[p].1))
                .product(),
            TruthSource::Corpus(ds) => ds.support_of(pattern.items()) as f64 / ds.m() as f64,
        }
    }

    /// An i.i.d. sample of `m` transactions. The alphabet is the full item
    /// set of the source, independent of the draw.
    pub fn sample(&self, m: usize, seed: u64) -> Result<SampleDataset, Error> {
        match &self.source {
            TruthSource::Bernoulli(probs) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rows = (0..m)
                    .map(|_| probs.iter().filter(|&&(_, p)| rng.gen_bool(p)).map(|&(i, _)| i).collect())
                    .collect();
                Ok(SampleDataset::with_alphabet(rows, probs.iter().map(|&(i, _)| i).collect()))
            }
            TruthSource::Corpus(ds) => ds.sample_with_replacement(m, seed),
        }
    }
}

/// True iff every reported pattern has true frequency at least `θ`.
pub fn check_no_false_positives(result: &TfpResult, truth: &GroundTruth) -> bool {
    result.patterns.iter().all(|p| truth.true_frequency(&p.pattern) >= truth.theta)
}

/// True iff every traced row satisfies `Δ ≤ Ψ̂ ≤ Ψ̃` and neither `Ψ̂` nor `Ψ̃`
/// grows from a traced parent to its child.
pub fn check_bound_chain(trace: &[TraceEntry]) -> bool {
    let index: BTreeMap<&Pattern, usize> = trace.iter().enumerate().map(|(i, e)| (&e.pattern, i)).collect();
    for entry in trace {
        let supp = entry.support as i64;
        if entry.rows.iter().any(|r| r.delta > r.psi_hat || r.psi_hat > supp || r.psi_hat < 0) {
            return false;
        }
        let Some(parent) = entry.pattern.canonical_parent() else { continue };
        let Some(&pi) = index.get(&parent) else { continue };
        let parent = &trace[pi];
        if entry.support > parent.support {
            return false;
        }
        for r in &entry.rows {
            if let Some(pr) = parent.rows.iter().find(|pr| pr.row == r.row) {
                if r.psi_hat > pr.psi_hat {
                    return false;
                }
            }
        }
    }
    true
}
