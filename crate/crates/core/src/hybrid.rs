//! Bounds from a truncated exploration.
//!
//! The engine explores only `G(S, β)`, the patterns with sample frequency at
//! least `β`. Every other pattern has `Σ_i f(s_i)² < βm`, so its one-row
//! average is covered, for all rows at once, by a uniform tail term that
//! depends only on `β` and a count of the remainder. The per-row value is the
//! larger of the two and the usual bound follows at confidence `δ - γ`.
//!
//! `β` must not depend on the signs. In node-budget mode it is derived from the
//! sample alone, as the smallest frequency whose frequent family (plus the
//! empty pattern) fits in the budget.

use alloc::vec::Vec;

use libm::{log, sqrt};
use serde::Serialize;

use crate::bounds::{from_r_tilde, mcera_concentration_term, BoundKind, BoundParams, BoundReport};
use crate::dataset::SampleDataset;
use crate::engine::{get_n_mcera, EngineConfig, Order};
use crate::error::Error;
use crate::lattice::Lattice;
use crate::rademacher::RademacherMatrix;

/// How the explored part is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Explicit frequency floor.
    Beta(f64),
    /// At most this many processed nodes, the empty pattern included.
    MaxNodes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    pub truncation: Truncation,
    /// Confidence spent on the tail.
    pub gamma: f64,
    pub delta: f64,
    pub order: Order,
    pub centralize: bool,
}

impl HybridConfig {
    pub fn with_beta(beta: f64, gamma: f64, delta: f64) -> Result<Self, Error> {
        Self::build(Truncation::Beta(beta), gamma, delta)
    }

    pub fn with_max_nodes(k: usize, gamma: f64, delta: f64) -> Result<Self, Error> {
        Self::build(Truncation::MaxNodes(k), gamma, delta)
    }

    fn build(truncation: Truncation, gamma: f64, delta: f64) -> Result<Self, Error> {
        let cfg = HybridConfig { truncation, gamma, delta, order: Order::SupportDesc, centralize: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie in (0, 1)"));
        }
        if !(self.gamma > 0.0 && self.gamma < self.delta) {
            return Err(Error::Config("gamma must lie in (0, delta)"));
        }
        match self.truncation {
            Truncation::Beta(b) if !(b >= 0.0 && b.is_finite()) => {
                Err(Error::Config("beta must be finite and non-negative"))
            }
            Truncation::MaxNodes(0) => Err(Error::Config("max_nodes must be at least 1")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridDetails {
    pub beta_effective: f64,
    /// Natural log of the bound on the number of unexplored patterns.
    pub omega_log: f64,
    pub gamma: f64,
    pub tail: f64,
    /// Per row: the tail term exceeded the explored supremum.
    pub per_row_tail_used: Vec<bool>,
    /// Per row: the value entering the average, on the family the bound is for.
    pub per_row_value: Vec<f64>,
    pub nodes_explored: usize,
    pub max_nodes: Option<usize>,
}

/// `sqrt(2β(ln n + log ω + ln(1/η)) / m)`: simultaneous bound over `n` rows on
/// the one-row average of at most `ω` functions with `Σ f² ≤ βm`.
pub fn k_tail_term(beta: f64, n: usize, log_omega: f64, eta: f64, m: usize) -> f64 {
    let arg = log(n as f64) + log_omega + log(1.0 / eta);
    sqrt((2.0 * beta * arg).max(0.0) / m as f64)
}

/// Smallest `β` (a multiple of `1/m`) for which the empty pattern plus every
/// pattern of frequency at least `β` number at most `k`. Uses only `ds`.
pub fn beta_for_node_budget(ds: &SampleDataset, k: usize) -> f64 {
    let m = ds.m();
    if m == 0 {
        return 0.0;
    }
    let lattice = Lattice::new(ds);
    let budget = k.saturating_sub(1);
    let fits = |s: usize| lattice.count_frequent_capped(s, budget) <= budget;
    // smallest s in [1, m + 1] with fits(s); fits is monotone in s
    let (mut lo, mut hi) = (1usize, m + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let len = ds.alphabet().len();
    if lo == 1 && len < 64 && (1u64 << len) <= k as u64 {
        // the whole lattice, zero-support patterns included, fits
        return 0.0;
    }
    lo as f64 / m as f64
}

/// Standard bound at confidence `δ - γ` from the explored suprema combined
/// row-wise with the tail term at confidence `γ`.
pub fn hybrid_sd_bound(ds: &SampleDataset, mat: &RademacherMatrix, cfg: &HybridConfig) -> Result<BoundReport, Error> {
    cfg.validate()?;
    let m = ds.m();
    let n = mat.n();
    let (beta, max_nodes) = match cfg.truncation {
        Truncation::Beta(b) => (b, None),
        Truncation::MaxNodes(k) => (beta_for_node_budget(ds, k), Some(k)),
    };
    let params = BoundParams::binary(m, n, cfg.delta - cfg.gamma, cfg.centralize)?;
    let engine_cfg = EngineConfig { order: cfg.order, beta_floor: Some(beta), max_nodes, ..Default::default() };
    let res = get_n_mcera(ds, mat, &engine_cfg)?;
    debug_assert!(!res.truncated);

    let omega_log = ds.stats().log_pattern_count_bound;
    let tail = k_tail_term(beta, n, omega_log, cfg.gamma, m);
    let mf = m as f64;
    let mut used = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (j, &nu) in res.nu_raw.iter().enumerate() {
        let explored = nu as f64 / mf;
        let raw = explored.max(tail);
        used.push(tail > explored);
        // the shift by -1/2 commutes with the row supremum
        let v = if cfg.centralize { raw - mat.row_sum(j) as f64 / (2.0 * mf) } else { raw };
        values.push(v);
    }
    let avg = values.iter().sum::<f64>() / n as f64;
    let conc = mcera_concentration_term(params.z(), n, m, params.eta / 4.0);
    let mut rep = from_r_tilde(BoundKind::Standard, avg, conc, &params);
    rep.hybrid = Some(HybridDetails {
        beta_effective: beta,
        omega_log,
        gamma: cfg.gamma,
        tail,
        per_row_tail_used: used,
        per_row_value: values,
        nodes_explored: res.nodes_explored,
        max_nodes,
    });
    Ok(rep)
}
