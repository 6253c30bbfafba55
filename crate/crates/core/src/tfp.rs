//! True frequent patterns with no false positives with high probability.
//!
//! One sign matrix is drawn and reused. Each round bounds the supremum
//! deviation over the patterns not yet accepted, `C = {f : freq(f) < θ + ε̂}`,
//! with the variance-aware bound, and accepts everything at or above the new
//! threshold. Shrinking `C` can only lower `ε̂`, so the threshold decreases
//! until `C` stops changing.

use alloc::vec::Vec;

use serde::Serialize;

use crate::bounds::{massart_era, sd_bound_from_era, sd_bound_variance, BoundParams};
use crate::dataset::{min_support_for, SampleDataset};
use crate::engine::{get_n_mcera, Admission, EngineConfig, Order};
use crate::error::Error;
use crate::lattice::{Lattice, Pattern};
use crate::rademacher::RademacherMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfpConfig {
    pub theta: f64,
    pub delta: f64,
    pub n: usize,
    pub seed: u64,
    pub order: Order,
}

impl TfpConfig {
    pub fn new(theta: f64, delta: f64, n: usize, seed: u64) -> Result<Self, Error> {
        let cfg = TfpConfig { theta, delta, n, seed, order: Order::SupportDesc };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config("theta must lie in [0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie in (0, 1)"));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinedPattern {
    pub pattern: Pattern,
    pub support: usize,
    pub frequency: f64,
    /// Round (from 1) whose threshold first accepted the pattern.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TfpResult {
    pub theta: f64,
    pub delta: f64,
    pub patterns: Vec<MinedPattern>,
    pub iterations: usize,
    pub epsilon_trace: Vec<f64>,
    pub nodes_trace: Vec<usize>,
    /// `θ + ε̂` of the last round.
    pub final_threshold: f64,
    /// The restricted family became empty before stabilizing.
    pub family_exhausted: bool,
}

impl TfpResult {
    pub fn contains(&self, items: &[u32]) -> bool {
        self.patterns.iter().any(|p| p.pattern.items() == items)
    }
}

/// Bound on the variance `μ(1 − μ)` of the patterns that could be false
/// positives, those with true frequency `μ < θ`.
pub fn variance_bound(theta: f64) -> f64 {
    if theta >= 0.5 {
        0.25
    } else {
        theta * (1.0 - theta)
    }
}

/// Draws the `n × m` signs from `cfg.seed` and runs [`tfp_r_with_matrix`].
pub fn tfp_r(ds: &SampleDataset, cfg: &TfpConfig) -> Result<TfpResult, Error> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptySource);
    }
    let mat = RademacherMatrix::draw(ds.m(), cfg.n, cfg.seed)?;
    tfp_r_with_matrix(ds, &mat, cfg)
}

/// The mining loop on a given sign matrix; every round uses `mat`.
pub fn tfp_r_with_matrix(ds: &SampleDataset, mat: &RademacherMatrix, cfg: &TfpConfig) -> Result<TfpResult, Error> {
    cfg.validate()?;
    let m = ds.m();
    let lattice = Lattice::new(ds);
    let params = BoundParams::binary(m, mat.n(), cfg.delta, true)?;
    let v = variance_bound(cfg.theta);

    let mut eps_trace: Vec<f64> = Vec::new();
    let mut nodes_trace = Vec::new();
    // C is {f : support < bound}; None is the whole lattice
    let mut c_bound: Option<usize> = None;
    let mut c_count = 0usize;
    let mut exhausted = false;
    loop {
        let admission = match c_bound {
            None => Admission::All,
            Some(s) => Admission::SupportBelow(s),
        };
        let ecfg = EngineConfig { order: cfg.order, admission, ..Default::default() };
        let res = get_n_mcera(ds, mat, &ecfg)?;
        if res.empty_family {
            exhausted = true;
            break;
        }
        nodes_trace.push(res.nodes_explored);
        let eps = sd_bound_variance(res.centralized_mcera, v, &params).epsilon;
        eps_trace.push(eps);
        let s_new = min_support_for(cfg.theta + eps, m);
        // patterns at or above the new threshold leave C
        let count_new = count_at_least(&lattice, s_new);
        if c_bound.is_some() && count_new == c_count {
            break;
        }
        c_bound = Some(s_new);
        c_count = count_new;
        if s_new == 0 {
            // C is empty; nothing left to bound
            exhausted = true;
            break;
        }
    }

    let final_eps = eps_trace.last().copied().unwrap_or(f64::INFINITY);
    let final_threshold = cfg.theta + final_eps;
    let patterns = collect(&lattice, m, &eps_trace, cfg.theta);
    Ok(TfpResult {
        theta: cfg.theta,
        delta: cfg.delta,
        patterns,
        iterations: eps_trace.len(),
        epsilon_trace: eps_trace,
        nodes_trace,
        final_threshold,
        family_exhausted: exhausted,
    })
}

/// One-shot reference: the finite-class ERA bound through the standard
/// bound, and every pattern at or above `θ + ε`.
pub fn tfp_baseline_massart(ds: &SampleDataset, cfg: &TfpConfig) -> Result<TfpResult, Error> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptySource);
    }
    let m = ds.m();
    let lattice = Lattice::new(ds);
    let era = massart_era(ds);
    let params = BoundParams::binary(m, 1, cfg.delta, false)?;
    let eps = sd_bound_from_era(era, &params).epsilon;
    let eps_trace = alloc::vec![eps];
    let patterns = collect(&lattice, m, &eps_trace, cfg.theta);
    Ok(TfpResult {
        theta: cfg.theta,
        delta: cfg.delta,
        patterns,
        iterations: 1,
        epsilon_trace: eps_trace,
        nodes_trace: Vec::new(),
        final_threshold: cfg.theta + eps,
        family_exhausted: false,
    })
}

fn count_at_least(lattice: &Lattice<'_>, min_support: usize) -> usize {
    if min_support == 0 {
        return usize::MAX;
    }
    lattice.count_frequent_capped(min_support, usize::MAX - 1)
}

fn collect(lattice: &Lattice<'_>, m: usize, eps_trace: &[f64], theta: f64) -> Vec<MinedPattern> {
    let Some(&last) = eps_trace.last() else {
        return Vec::new();
    };
    let thresholds: Vec<usize> = eps_trace.iter().map(|e| min_support_for(theta + e, m)).collect();
    let mut out: Vec<MinedPattern> = lattice
        .frequent_patterns(min_support_for(theta + last, m))
        .into_iter()
        .map(|(pattern, support)| {
            let iteration = thresholds.iter().position(|&s| support >= s).map_or(thresholds.len(), |p| p + 1);
            MinedPattern { pattern, support, frequency: support as f64 / m as f64, iteration }
        })
        .collect();
    out.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.pattern.cmp(&b.pattern)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_items(m: usize, seed: u64) -> SampleDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..m)
            .map(|_| {
                let mut t = Vec::new();
                if rng.gen_bool(0.9) {
                    t.push(1);
                }
                if rng.gen_bool(0.1) {
                    t.push(2);
                }
                t
            })
            .collect();
        SampleDataset::with_alphabet(rows, vec![1, 2])
    }

    #[test]
    fn variance_rule() {
        assert!((variance_bound(0.05) - 0.0475).abs() < 1e-16);
        assert_eq!(variance_bound(0.5), 0.25);
        assert_eq!(variance_bound(0.7), 0.25);
        assert_eq!(variance_bound(0.0), 0.0);
    }

    #[test]
    fn config_ranges() {
        assert!(TfpConfig::new(1.1, 0.1, 1, 0).is_err());
        assert!(TfpConfig::new(0.5, 0.0, 1, 0).is_err());
        assert!(TfpConfig::new(0.5, 0.1, 0, 0).is_err());
    }

    #[test]
    fn toy_is_vacuous() {
        let ds = SampleDataset::new(vec![vec![1], vec![1, 2], vec![2]]);
        let cfg = TfpConfig::new(0.5, 0.1, 1, 3).unwrap();
        let res = tfp_r(&ds, &cfg).unwrap();
        assert!(res.epsilon_trace[0] > 0.5);
        assert!(res.patterns.is_empty());
        assert!(tfp_baseline_massart(&ds, &cfg).unwrap().patterns.is_empty());
        let cfg = TfpConfig::new(1.0, 0.1, 1, 3).unwrap();
        assert!(tfp_r(&ds, &cfg).unwrap().patterns.is_empty());
    }

    #[test]
    fn two_item_generator() {
        let ds = two_items(10_000, 8);
        let cfg = TfpConfig::new(0.5, 0.1, 10, 1).unwrap();
        let res = tfp_r(&ds, &cfg).unwrap();
        assert!(res.contains(&[1]));
        assert!(!res.contains(&[2]));
        assert!(res.epsilon_trace.windows(2).all(|w| w[1] <= w[0]));
        let base = tfp_baseline_massart(&ds, &cfg).unwrap();
        assert!(base.patterns.iter().all(|p| res.contains(p.pattern.items())));
    }

    #[test]
    fn output_matches_final_threshold() {
        let ds = two_items(2_000, 4);
        let cfg = TfpConfig::new(0.05, 0.1, 5, 9).unwrap();
        let res = tfp_r(&ds, &cfg).unwrap();
        let s = min_support_for(res.final_threshold, ds.m());
        let expected = Lattice::new(&ds).frequent_patterns(s).len();
        assert_eq!(res.patterns.len(), expected);
        for p in &res.patterns {
            let eps = res.epsilon_trace[p.iteration - 1];
            assert!(p.frequency >= cfg.theta + eps);
        }
    }
}
