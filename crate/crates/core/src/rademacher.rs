//! The `n × m` matrix of i.i.d. Rademacher signs.
//!
//! Signs are packed one bit per entry, row-major, with `+1 ↔ 1`. A row is a
//! run of `ceil(m / 64)` words whose unused high bits are always zero, so a
//! positive count over a set of transactions is a masked popcount.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RademacherMatrix {
    n: usize,
    m: usize,
    seed: Option<u64>,
    words_per_row: usize,
    bits: Vec<u64>,
    row_sums: Vec<i64>,
}

impl RademacherMatrix {
    /// Draws an `n × m` matrix from ChaCha8 seeded with `seed`. Rows are
    /// filled in order, each from consecutive 64-bit outputs, low bit first.
    pub fn draw(m: usize, n: usize, seed: u64) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        if n == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        let words_per_row = m.div_ceil(64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bits = vec![0u64; n * words_per_row];
        for row in bits.chunks_mut(words_per_row) {
            for w in row.iter_mut() {
                *w = rng.next_u64();
            }
            row[words_per_row - 1] &= tail_mask(m);
        }
        Ok(Self::from_bits(n, m, Some(seed), words_per_row, bits))
    }

    /// Builds a matrix from explicit `±1` rows. All rows must have the same
    /// non-zero length.
    pub fn from_signs<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self, Error> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        let m = rows[0].as_ref().len();
        if m == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        let words_per_row = m.div_ceil(64);
        let mut bits = vec![0u64; n * words_per_row];
        for (j, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::Dimension { expected: m, found: row.len() });
            }
            for (i, &s) in row.iter().enumerate() {
                match s {
                    1 => bits[j * words_per_row + i / 64] |= 1 << (i % 64),
                    -1 => {}
                    other => return Err(Error::InvalidSign(other as i64)),
                }
            }
        }
        Ok(Self::from_bits(n, m, None, words_per_row, bits))
    }

    fn from_bits(n: usize, m: usize, seed: Option<u64>, words_per_row: usize, bits: Vec<u64>) -> Self {
        let row_sums = bits
            .chunks(words_per_row)
            .map(|row| {
                let pos: u32 = row.iter().map(|w| w.count_ones()).sum();
                2 * pos as i64 - m as i64
            })
            .collect();
        RademacherMatrix { n, m, seed, words_per_row, bits, row_sums }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The seed the matrix was drawn from, `None` for explicit matrices.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn sign(&self, j: usize, i: usize) -> i8 {
        if self.bit(j, i) {
            1
        } else {
            -1
        }
    }

    #[inline]
    fn bit(&self, j: usize, i: usize) -> bool {
        (self.bits[j * self.words_per_row + i / 64] >> (i % 64)) & 1 == 1
    }

    /// `Σ_i σ_{j,i}`.
    pub fn row_sum(&self, j: usize) -> i64 {
        self.row_sums[j]
    }

    pub fn row_sums(&self) -> &[i64] {
        &self.row_sums
    }

    /// Number of `i ∈ tids` with `σ_{j,i} = +1`. `tids` must be duplicate-free.
    pub fn pos_count(&self, j: usize, tids: &[u32]) -> Result<usize, Error> {
        if j >= self.n {
            return Err(Error::Index { index: j, bound: self.n });
        }
        if let Some(&bad) = tids.iter().find(|&&t| t as usize >= self.m) {
            return Err(Error::Index { index: bad as usize, bound: self.m });
        }
        Ok(self.pos_count_unchecked(j, tids))
    }

    #[inline]
    pub(crate) fn pos_count_unchecked(&self, j: usize, tids: &[u32]) -> usize {
        let row = self.row(j);
        tids.iter().filter(|&&t| (row[t as usize / 64] >> (t % 64)) & 1 == 1).count()
    }

    /// Positive count restricted to a tid bitmask covering words
    /// `lo..hi` of the row.
    #[inline]
    pub(crate) fn pos_count_masked(&self, j: usize, mask: &[u64], lo: usize, hi: usize) -> usize {
        let row = &self.row(j)[lo..hi];
        row.iter().zip(&mask[lo..hi]).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    #[inline]
    pub(crate) fn row(&self, j: usize) -> &[u64] {
        &self.bits[j * self.words_per_row..(j + 1) * self.words_per_row]
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    /// Debug dump: one line per row, entries `+1`/`-1` separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.m * 3 + 1));
        for j in 0..self.n {
            for i in 0..self.m {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(if self.bit(j, i) { "+1" } else { "-1" });
            }
            out.push('\n');
        }
        out
    }
}

fn tail_mask(m: usize) -> u64 {
    match m % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_dimensions_rejected() {
        assert!(RademacherMatrix::draw(0, 1, 1).is_err());
        assert!(RademacherMatrix::draw(3, 0, 1).is_err());
        assert!(RademacherMatrix::from_signs::<[i8; 0]>(&[]).is_err());
    }

    #[test]
    fn draw_is_deterministic() {
        let a = RademacherMatrix::draw(3, 1, 77).unwrap();
        let b = RademacherMatrix::draw(3, 1, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        let big_a = RademacherMatrix::draw(1000, 4, 5).unwrap();
        let big_b = RademacherMatrix::draw(1000, 4, 6).unwrap();
        assert_ne!(big_a, big_b);
    }

    #[test]
    fn row_sum_is_small_for_large_m() {
        for seed in 0..20 {
            let mat = RademacherMatrix::draw(10_000, 1, seed).unwrap();
            assert!(mat.row_sum(0).abs() <= 600, "seed {seed}: {}", mat.row_sum(0));
        }
    }

    #[test]
    fn plus_fraction_near_half() {
        let mat = RademacherMatrix::draw(100_000, 1, 2024).unwrap();
        let all: Vec<u32> = (0..100_000).collect();
        let frac = mat.pos_count(0, &all).unwrap() as f64 / 100_000.0;
        assert!((0.49..=0.51).contains(&frac), "{frac}");
    }

    #[test]
    fn pos_count_examples() {
        let mat = RademacherMatrix::from_signs(&[[1i8, -1, 1]]).unwrap();
        assert_eq!(mat.pos_count(0, &[]).unwrap(), 0);
        assert_eq!(mat.pos_count(0, &[0, 1]).unwrap(), 1);
        assert_eq!(mat.row_sum(0), 1);
        let plus = RademacherMatrix::from_signs(&[[1i8; 5]]).unwrap();
        assert_eq!(plus.pos_count(0, &[0, 2, 4]).unwrap(), 3);
    }

    #[test]
    fn pos_count_index_errors() {
        let mat = RademacherMatrix::from_signs(&[[1i8, -1, 1]]).unwrap();
        assert_eq!(mat.pos_count(1, &[0]), Err(Error::Index { index: 1, bound: 1 }));
        assert_eq!(mat.pos_count(0, &[3]), Err(Error::Index { index: 3, bound: 3 }));
    }

    #[test]
    fn bad_signs_rejected() {
        assert_eq!(RademacherMatrix::from_signs(&[[1i8, 0]]), Err(Error::InvalidSign(0)));
        assert!(RademacherMatrix::from_signs(&[vec![1i8, 1], vec![1i8]]).is_err());
    }

    #[test]
    fn text_dump() {
        let mat = RademacherMatrix::from_signs(&[[1i8, -1, 1], [-1, -1, 1]]).unwrap();
        assert_eq!(mat.to_text(), "+1 -1 +1\n-1 -1 +1\n");
    }

    proptest! {
        #[test]
        fn row_sums_and_counts_agree(m in 1usize..300, n in 1usize..4, seed in any::<u64>(),
                                     picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..50)) {
            let mat = RademacherMatrix::draw(m, n, seed).unwrap();
            let all: Vec<u32> = (0..m as u32).collect();
            let mut tids: Vec<u32> = picks.iter().map(|p| p.index(m) as u32).collect();
            tids.sort_unstable();
            tids.dedup();
            for j in 0..n {
                let rs = mat.row_sum(j);
                prop_assert!(rs.unsigned_abs() as usize <= m);
                prop_assert_eq!(rs.rem_euclid(2), (m as i64).rem_euclid(2));
                prop_assert_eq!(rs, 2 * mat.pos_count(j, &all).unwrap() as i64 - m as i64);
                let direct: i64 = (0..m).map(|i| mat.sign(j, i) as i64).sum();
                prop_assert_eq!(rs, direct);
                let pos = mat.pos_count(j, &tids).unwrap();
                let neg = tids.iter().filter(|&&t| mat.sign(j, t as usize) == -1).count();
                prop_assert_eq!(pos + neg, tids.len());
                let mut mask = vec![0u64; mat.words_per_row()];
                for &t in &tids { mask[t as usize / 64] |= 1 << (t % 64); }
                prop_assert_eq!(mat.pos_count_masked(j, &mask, 0, mask.len()), pos);
            }
        }
    }
}
