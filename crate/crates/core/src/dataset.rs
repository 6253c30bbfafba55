//! Transactional samples: FIMI parsing, seeded resampling and corpus
//! statistics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Item identifier as it appears in the input. Ids need not be contiguous.
pub type ItemId = u32;

/// A bag of transactions together with the item alphabet defining the
/// pattern language.
///
/// Every transaction is sorted ascending and duplicate-free. The alphabet is
/// sorted and contains every item of every transaction. For datasets built
/// from raw transactions it is exactly their union; a subsample keeps the
/// alphabet of its source so that the pattern language does not depend on
/// the draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleDataset {
    transactions: Vec<Vec<ItemId>>,
    alphabet: Vec<ItemId>,
}

/// Summary numbers for a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub m: usize,
    pub alphabet_size: usize,
    pub avg_transaction_len: f64,
    /// `ln Σ_i 2^{|s_i|}`, an upper bound on the log of the number of
    /// itemsets occurring in the sample. `-inf` for an empty dataset.
    pub log_pattern_count_bound: f64,
}

impl SampleDataset {
    /// Builds a dataset from raw transactions, sorting and deduplicating each
    /// one. Empty transactions are kept.
    pub fn new(transactions: Vec<Vec<ItemId>>) -> Self {
        let transactions: Vec<Vec<ItemId>> = transactions.into_iter().map(normalize).collect();
        let alphabet = union_of(&transactions, &[]);
        SampleDataset { transactions, alphabet }
    }

    /// Like [`SampleDataset::new`] but with an explicit language. Items of the
    /// transactions missing from `alphabet` are added to it.
    pub fn with_alphabet(transactions: Vec<Vec<ItemId>>, alphabet: Vec<ItemId>) -> Self {
        let transactions: Vec<Vec<ItemId>> = transactions.into_iter().map(normalize).collect();
        let alphabet = union_of(&transactions, &alphabet);
        SampleDataset { transactions, alphabet }
    }

    pub fn m(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn transactions(&self) -> &[Vec<ItemId>] {
        &self.transactions
    }

    pub fn transaction(&self, i: usize) -> &[ItemId] {
        &self.transactions[i]
    }

    pub fn alphabet(&self) -> &[ItemId] {
        &self.alphabet
    }

    /// Parses FIMI text: one transaction per non-empty line, items as
    /// whitespace-separated non-negative integers.
    pub fn parse_fimi(source: &[u8]) -> Result<Self, Error> {
        let mut transactions = Vec::new();
        for (lineno, raw) in source.split(|&b| b == b'\n').enumerate() {
            let line = core::str::from_utf8(raw)
                .map_err(|_| Error::Parse { line: lineno + 1, token: String::from_utf8_lossy(raw).into_owned() })?;
            let mut items = Vec::new();
            for token in line.split_ascii_whitespace() {
                let id: ItemId =
                    token.parse().map_err(|_| Error::Parse { line: lineno + 1, token: token.to_string() })?;
                items.push(id);
            }
            if !items.is_empty() {
                transactions.push(items);
            }
        }
        Ok(Self::new(transactions))
    }

    /// Writes the transactions back in FIMI format, one line each.
    pub fn to_fimi(&self) -> String {
        let mut out = String::new();
        for t in &self.transactions {
            for (k, item) in t.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{item}");
            }
            out.push('\n');
        }
        out
    }

    /// Draws `size` transactions uniformly, independently and with
    /// replacement. The stream is ChaCha8 seeded from `seed`, indices are drawn
    /// as `u64` so the result does not depend on the platform word size.
    pub fn sample_with_replacement(&self, size: usize, seed: u64) -> Result<Self, Error> {
        if size == 0 {
            return Ok(SampleDataset { transactions: Vec::new(), alphabet: self.alphabet.clone() });
        }
        if self.transactions.is_empty() {
            return Err(Error::EmptySource);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.transactions.len() as u64;
        let transactions = (0..size).map(|_| self.transactions[rng.gen_range(0..m) as usize].clone()).collect();
        Ok(SampleDataset { transactions, alphabet: self.alphabet.clone() })
    }

    pub fn stats(&self) -> DatasetStats {
        let m = self.transactions.len();
        let total: usize = self.transactions.iter().map(Vec::len).sum();
        DatasetStats {
            m,
            alphabet_size: self.alphabet.len(),
            avg_transaction_len: if m == 0 { 0.0 } else { total as f64 / m as f64 },
            log_pattern_count_bound: log_sum_pow2(self.transactions.iter().map(Vec::len)),
        }
    }

    /// Number of transactions containing every item of `pattern` (sorted).
    pub fn support_of(&self, pattern: &[ItemId]) -> usize {
        self.transactions.iter().filter(|t| is_sorted_subset(pattern, t)).count()
    }
}

/// Smallest support `s` with `s / m ≥ freq`, evaluated in binary64 exactly as
/// the frequency comparisons elsewhere are, so that `support ≥ result` and
/// `support as f64 / m as f64 ≥ freq` always agree.
pub fn min_support_for(freq: f64, m: usize) -> usize {
    if freq.is_nan() || freq <= 0.0 || m == 0 {
        return 0;
    }
    let mf = m as f64;
    if freq > 1.0 {
        return m + 1;
    }
    let mut s = libm::ceil(freq * mf) as usize;
    while s > 0 && (s - 1) as f64 / mf >= freq {
        s -= 1;
    }
    while s <= m && (s as f64) / mf < freq {
        s += 1;
    }
    s
}

/// `ln Σ 2^{len}` over the given lengths, computed in log space. Lengths are
/// bucketed so the cost is linear in the input plus the longest length.
pub(crate) fn log_sum_pow2(lengths: impl Iterator<Item = usize>) -> f64 {
    let mut counts: Vec<u64> = Vec::new();
    for len in lengths {
        if counts.len() <= len {
            counts.resize(len + 1, 0);
        }
        counts[len] += 1;
    }
    let Some(max_len) = counts.iter().rposition(|&c| c > 0) else {
        return f64::NEG_INFINITY;
    };
    let scaled: f64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(len, &c)| c as f64 * libm::exp2(len as f64 - max_len as f64))
        .sum();
    max_len as f64 * core::f64::consts::LN_2 + libm::log(scaled)
}

pub(crate) fn is_sorted_subset(small: &[ItemId], large: &[ItemId]) -> bool {
    let mut it = large.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

fn normalize(mut t: Vec<ItemId>) -> Vec<ItemId> {
    t.sort_unstable();
    t.dedup();
    t
}

fn union_of(transactions: &[Vec<ItemId>], extra: &[ItemId]) -> Vec<ItemId> {
    let mut all: Vec<ItemId> = transactions.iter().flatten().copied().chain(extra.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all
}
