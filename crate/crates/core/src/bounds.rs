//! Closed-form tail bounds turning a Monte-Carlo Rademacher average into an
//! upper bound `ε` on the supremum deviation.
//!
//! All logarithms are natural. Every report itemizes the additive terms of
//! its `ε`, and `ε` is computed as their sum.

use alloc::vec;
use alloc::vec::Vec;

use libm::{log, sqrt};
use serde::Serialize;

use crate::dataset::SampleDataset;
use crate::engine::McEraResult;
use crate::error::Error;
use crate::hybrid::HybridDetails;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// Three-tail bound valid for any number of draws, confidence split four ways.
    #[serde(rename = "thm33")]
    Standard,
    /// Variance-aware refinement used for true frequent pattern mining.
    #[serde(rename = "thm34_variance")]
    VarianceAware,
    /// Single-tail bound for a single draw of the centralized family.
    #[serde(rename = "thm46_1mcera")]
    SingleDraw,
    /// Deterministic ERA bound from the finite-class lemma, fed through the
    /// standard bound without the Monte-Carlo concentration term.
    #[serde(rename = "massart_baseline")]
    Massart,
}

impl BoundKind {
    /// The token used on the command line and in CSV output.
    pub fn token(self) -> &'static str {
        match self {
            BoundKind::Standard => "thm33",
            BoundKind::VarianceAware => "thm34_variance",
            BoundKind::SingleDraw => "thm46_1mcera",
            BoundKind::Massart => "massart_baseline",
        }
    }
}

/// Range and confidence parameters of a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub n: usize,
    pub eta: f64,
    /// Evaluate on the family shifted by `-c/2`, which halves `z`.
    pub centralize: bool,
}

impl BoundParams {
    pub fn new(a: f64, b: f64, m: usize, n: usize, eta: f64, centralize: bool) -> Result<Self, Error> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Config("confidence parameter must lie in (0, 1)"));
        }
        if !(b - a).is_finite() || b == a {
            return Err(Error::Config("function range must be a non-degenerate interval"));
        }
        if m == 0 || n == 0 {
            return Err(Error::Config("m and n must be positive"));
        }
        Ok(BoundParams { a, b, m, n, eta, centralize })
    }

    /// Indicator functions of itemsets: range `[0, 1]`.
    pub fn binary(m: usize, n: usize, eta: f64, centralize: bool) -> Result<Self, Error> {
        Self::new(0.0, 1.0, m, n, eta, centralize)
    }

    pub fn with_eta(self, eta: f64) -> Result<Self, Error> {
        Self::new(self.a, self.b, self.m, self.n, eta, self.centralize)
    }

    pub fn c(&self) -> f64 {
        (self.b - self.a).abs()
    }

    /// `max(|a|, |b|)`, or `c/2` for the centralized family.
    pub fn z(&self) -> f64 {
        if self.centralize {
            self.c() / 2.0
        } else {
            self.a.abs().max(self.b.abs())
        }
    }

    /// The average matching the centralization setting.
    pub fn mcera_of(&self, res: &McEraResult) -> f64 {
        if self.centralize {
            res.centralized_mcera
        } else {
            res.mcera
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerm {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_kind: BoundKind,
    /// The Rademacher average (or ERA bound) fed into the formula.
    pub mcera_used: f64,
    pub concentration_term: f64,
    pub r_tilde: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    /// Variance bound, variance-aware kind only.
    pub variance: Option<f64>,
    pub epsilon: f64,
    pub terms: Vec<BoundTerm>,
    pub eta: f64,
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub z: f64,
    /// A radicand was negative and clamped at zero.
    pub degenerate: bool,
    pub hybrid: Option<HybridDetails>,
}

impl BoundReport {
    pub fn terms_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }
}

/// `2z·sqrt(ln(1/η) / (2nm))`: the deviation of the `n`-draw average from
/// its expectation over the signs. Pass `η/4` for the four-way split.
pub fn mcera_concentration_term(z: f64, n: usize, m: usize, eta: f64) -> f64 {
    2.0 * z * sqrt(log(1.0 / eta) / (2.0 * n as f64 * m as f64))
}

/// Standard bound: `R̃ = mcera + 2z·sqrt(ln(4/η)/(2nm))` and
/// `ε = 2R̃ + sqrt(c(4mR̃ + c·ln(4/η))·ln(4/η))/m + c·ln(4/η)/m + c·sqrt(ln(4/η)/(2m))`.
pub fn sd_bound_thm33(mcera: f64, p: &BoundParams) -> BoundReport {
    let conc = mcera_concentration_term(p.z(), p.n, p.m, p.eta / 4.0);
    from_r_tilde(BoundKind::Standard, mcera, conc, p)
}

/// Standard bound with a deterministic ERA upper bound in place of the
/// Monte-Carlo average, so there is no concentration term.
pub fn sd_bound_from_era(era: f64, p: &BoundParams) -> BoundReport {
    from_r_tilde(BoundKind::Massart, era, 0.0, p)
}

pub(crate) fn from_r_tilde(kind: BoundKind, avg: f64, conc: f64, p: &BoundParams) -> BoundReport {
    let c = p.c();
    let m = p.m as f64;
    let l = log(4.0 / p.eta);
    let r_tilde = avg + conc;
    let (rad, degenerate) = clamp(c * (4.0 * m * r_tilde + c * l) * l);
    let terms = vec![
        BoundTerm { name: "two_r_tilde", value: 2.0 * r_tilde },
        BoundTerm { name: "self_bounding", value: sqrt(rad) / m },
        BoundTerm { name: "linear_tail", value: c * l / m },
        BoundTerm { name: "mcdiarmid_tail", value: c * sqrt(l / (2.0 * m)) },
    ];
    finish(BoundReport {
        bound_kind: kind,
        mcera_used: avg,
        concentration_term: conc,
        r_tilde: Some(r_tilde),
        rho: None,
        r: None,
        variance: None,
        epsilon: 0.0,
        terms,
        eta: p.eta,
        m: p.m,
        n: p.n,
        c,
        z: p.z(),
        degenerate,
        hybrid: None,
    })
}

/// Variance-aware bound for a family whose every variance is at most `v`:
/// `ρ = mcera + 2z·sqrt(ln(4/η)/(2nm))`,
/// `r = ρ + (sqrt(c(4mρ + c·ln(4/η))·ln(4/η)) + c·ln(4/η)) / 2m`,
/// `ε = 2r + sqrt(2·ln(4/η)(v + 8cr)/m) + 2c·ln(4/η)/(3m)`.
pub fn sd_bound_variance(mcera: f64, v: f64, p: &BoundParams) -> BoundReport {
    let c = p.c();
    let m = p.m as f64;
    let l = log(4.0 / p.eta);
    let conc = mcera_concentration_term(p.z(), p.n, p.m, p.eta / 4.0);
    let rho = mcera + conc;
    let (rad_r, deg_r) = clamp(c * (4.0 * m * rho + c * l) * l);
    let r = rho + (sqrt(rad_r) + c * l) / (2.0 * m);
    let (rad_e, deg_e) = clamp(2.0 * l * (v + 8.0 * c * r) / m);
    let terms = vec![
        BoundTerm { name: "two_r", value: 2.0 * r },
        BoundTerm { name: "bernstein", value: sqrt(rad_e) },
        BoundTerm { name: "linear_tail", value: 2.0 * c * l / (3.0 * m) },
    ];
    finish(BoundReport {
        bound_kind: BoundKind::VarianceAware,
        mcera_used: mcera,
        concentration_term: conc,
        r_tilde: None,
        rho: Some(rho),
        r: Some(r),
        variance: Some(v),
        epsilon: 0.0,
        terms,
        eta: p.eta,
        m: p.m,
        n: p.n,
        c,
        z: p.z(),
        degenerate: deg_r || deg_e,
        hybrid: None,
    })
}

/// Single-draw bound on the centralized family:
/// `ε = 2·mcera_centralized + 3c·sqrt(ln(2/η)/(2m))`.
pub fn sd_bound_1mcera(mcera_centralized: f64, c: f64, m: usize, eta: f64) -> BoundReport {
    let mf = m as f64;
    let terms = vec![
        BoundTerm { name: "two_mcera", value: 2.0 * mcera_centralized },
        BoundTerm { name: "tail", value: 3.0 * c * sqrt(log(2.0 / eta) / (2.0 * mf)) },
    ];
    finish(BoundReport {
        bound_kind: BoundKind::SingleDraw,
        mcera_used: mcera_centralized,
        concentration_term: 0.0,
        r_tilde: None,
        rho: None,
        r: None,
        variance: None,
        epsilon: 0.0,
        terms,
        eta,
        m,
        n: 1,
        c,
        z: c / 2.0,
        degenerate: false,
        hybrid: None,
    })
}

/// Average of the per-row suprema for the family shifted by `-c/2`.
///
/// Shifting every function by a constant shifts row `j`'s discrepancies by
/// `-(c/2)·Σ_i σ_{j,i}` whichever function attains the supremum, so no new
/// traversal is needed.
pub fn centralize_mcera(nu_raw: &[i64], row_sums: &[i64], c: f64, n: usize, m: usize) -> f64 {
    // ν_j − (c/2)·rs_j summed over rows, over n·m
    let nu: i64 = nu_raw.iter().sum();
    let rs: i64 = row_sums.iter().sum();
    (nu as f64 - c * rs as f64 / 2.0) / (n as f64 * m as f64)
}

/// ERA upper bound `sqrt(2·ln|F|)·max_f ‖f‖₂ / m` for a finite family. For
/// itemset indicators `‖f‖₂ = sqrt(support)`.
pub fn massart_baseline(log_family_count: f64, max_l2_norm: f64, m: usize) -> f64 {
    if log_family_count.is_nan() || log_family_count <= 0.0 {
        return 0.0;
    }
    sqrt(2.0 * log_family_count) * max_l2_norm / m as f64
}

/// [`massart_baseline`] for the itemset family of `ds`: `ln Σ_i 2^{|s_i|}`
/// functions, the largest norm being that of the most frequent item.
pub fn massart_era(ds: &SampleDataset) -> f64 {
    let mut counts = alloc::collections::BTreeMap::new();
    for t in ds.transactions() {
        for &item in t {
            *counts.entry(item).or_insert(0usize) += 1;
        }
    }
    let max_support = counts.values().copied().max().unwrap_or(0);
    massart_baseline(ds.stats().log_pattern_count_bound, sqrt(max_support as f64), ds.m())
}

fn clamp(x: f64) -> (f64, bool) {
    if x < 0.0 {
        (0.0, true)
    } else {
        (x, false)
    }
}

fn finish(mut rep: BoundReport) -> BoundReport {
    rep.epsilon = rep.terms_sum();
    rep
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn p(m: usize, n: usize, eta: f64) -> BoundParams {
        BoundParams::binary(m, n, eta, true).unwrap()
    }

    // Reference values below were produced with 40-digit arithmetic
    // (mpmath) directly from the closed forms.

    #[test]
    fn concentration_reference() {
        assert!(close(mcera_concentration_term(0.5, 10, 100, 0.025), 0.042946940834673756, 1e-14));
        assert_eq!(mcera_concentration_term(0.5, 10, 100, 1.0), 0.0);
        let a = mcera_concentration_term(0.5, 10, 100, 0.1);
        let b = mcera_concentration_term(0.5, 20, 100, 0.1);
        assert!(close(a / b, core::f64::consts::SQRT_2, 1e-14));
    }

    #[test]
    fn standard_reference() {
        let rep = sd_bound_thm33(0.1, &p(100, 10, 0.1));
        assert!(close(rep.r_tilde.unwrap(), 0.14294694083467376, 1e-14));
        assert!(close(rep.epsilon, 0.6084372286997553, 1e-13));
        assert!(!rep.degenerate);
        assert_eq!(rep.bound_kind, BoundKind::Standard);
    }

    #[test]
    fn standard_limits() {
        // the confidence split keeps ln 4 in every tail as η → 1
        let rep = sd_bound_thm33(0.0, &p(100, 10, 1.0 - 1e-12));
        let l = core::f64::consts::LN_2 * 2.0;
        let r = 2.0 * 0.5 * sqrt(l / 2000.0);
        let eps = 2.0 * r + sqrt((400.0 * r + l) * l) / 100.0 + l / 100.0 + sqrt(l / 200.0);
        assert!(close(rep.epsilon, eps, 1e-9));
        let big = sd_bound_thm33(0.05, &p(usize::MAX / 4, 10, 0.1));
        assert!(close(big.epsilon, 0.1, 1e-6));
    }

    #[test]
    fn standard_without_concentration_is_era_shape() {
        let params = p(1000, 10, 0.1);
        let era = sd_bound_from_era(0.07, &params);
        let full = sd_bound_thm33(0.07, &params);
        assert_eq!(era.concentration_term, 0.0);
        assert_eq!(era.terms[2], full.terms[2]);
        assert_eq!(era.terms[3], full.terms[3]);
        assert!(close(era.terms[0].value, 0.14, 1e-15));
        assert!(era.epsilon < full.epsilon);
    }

    #[test]
    fn very_negative_average_clamps() {
        let rep = sd_bound_thm33(-5.0, &p(100, 1, 0.1));
        assert!(rep.degenerate);
        assert!(rep.terms.iter().all(|t| t.value.is_finite()));
    }

    #[test]
    fn variance_reference() {
        let rep = sd_bound_variance(0.05, 0.0475, &p(10_000, 10, 0.1));
        assert!(close(rep.rho.unwrap(), 0.054294694083467376, 1e-14));
        assert!(close(rep.r.unwrap(), 0.058958276112346145, 1e-13));
        assert!(close(rep.epsilon, 0.13773358664338150, 1e-12));
    }

    #[test]
    fn variance_collapse_at_zero() {
        // ρ = 0 and v = 0: r = c·ln(4/η)/m, ε = 2r + sqrt(16·ln(4/η)·r/m) + 2c·ln(4/η)/(3m)
        let params = p(500, 4, 0.1);
        let conc = mcera_concentration_term(params.z(), 4, 500, 0.025);
        let rep = sd_bound_variance(-conc, 0.0, &params);
        let l = log(40.0);
        let r = l / 500.0;
        assert!(close(rep.rho.unwrap(), 0.0, 1e-15));
        assert!(close(rep.r.unwrap(), r, 1e-12));
        let eps = 2.0 * r + sqrt(2.0 * l * 8.0 * r / 500.0) + 2.0 * l / 1500.0;
        assert!(close(rep.epsilon, eps, 1e-12));
    }

    #[test]
    fn variance_monotone_in_v() {
        let params = p(2000, 10, 0.1);
        let mut last = 0.0;
        for k in 0..=25 {
            let e = sd_bound_variance(0.03, k as f64 / 100.0, &params).epsilon;
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn single_draw_reference() {
        let rep = sd_bound_1mcera(-1.0 / 6.0, 1.0, 3, 0.1);
        assert!(close(rep.epsilon, 1.7864776040691008, 1e-13));
        assert!(rep.terms[1].value > 0.0);
    }

    #[test]
    fn single_draw_beats_standard_for_one_draw() {
        for m in [100usize, 1000, 10_000, 100_000, 1_000_000] {
            for k in 0..=10 {
                let mc = k as f64 * 0.05;
                let one = sd_bound_1mcera(mc, 1.0, m, 0.1).epsilon;
                let std = sd_bound_thm33(mc, &p(m, 1, 0.1)).epsilon;
                assert!(one < std, "m={m} mcera={mc}: {one} vs {std}");
            }
        }
    }

    #[test]
    fn centralization_examples() {
        assert!(close(centralize_mcera(&[0], &[1], 1.0, 1, 3), -1.0 / 6.0, 1e-15));
        assert_eq!(centralize_mcera(&[3, 4], &[0, 0], 1.0, 2, 5), 0.7);
        assert_eq!(centralize_mcera(&[3, 4], &[2, -6], 0.0, 2, 5), 0.7);
    }

    #[test]
    fn massart_examples() {
        let v = massart_baseline(log(3.0), sqrt(2.0), 3);
        assert!(close(v, 0.6987647159788033, 1e-14));
        assert_eq!(massart_baseline(0.0, 1.0, 10), 0.0);
        // toy: ln(2 + 4 + 2), most frequent item in 2 of 3 transactions
        let ds = SampleDataset::new(vec![vec![1], vec![1, 2], vec![2]]);
        assert!(close(massart_era(&ds), sqrt(2.0 * log(8.0)) * sqrt(2.0) / 3.0, 1e-15));
    }

    #[test]
    fn monotone_in_m_and_average() {
        for kind in 0..3 {
            let eval = |mc: f64, m: usize| match kind {
                0 => sd_bound_thm33(mc, &p(m, 10, 0.1)).epsilon,
                1 => sd_bound_variance(mc, 0.1, &p(m, 10, 0.1)).epsilon,
                _ => sd_bound_1mcera(mc, 1.0, m, 0.1).epsilon,
            };
            for &mc in &[0.0, 0.01, 0.1, 0.3] {
                let mut last = f64::INFINITY;
                for m in [50usize, 100, 1000, 5000, 100_000] {
                    let e = eval(mc, m);
                    assert!(e <= last);
                    last = e;
                }
            }
            for m in [100usize, 10_000] {
                let mut last = f64::NEG_INFINITY;
                for k in 0..20 {
                    let e = eval(k as f64 * 0.02, m);
                    assert!(e >= last);
                    last = e;
                }
            }
        }
    }

    #[test]
    fn itemized_terms_sum_to_epsilon() {
        let params = p(777, 7, 0.05);
        for rep in [
            sd_bound_thm33(0.04, &params),
            sd_bound_variance(0.04, 0.2, &params),
            sd_bound_1mcera(0.04, 1.0, 777, 0.05),
            sd_bound_from_era(0.2, &params),
        ] {
            assert!(close(rep.terms_sum(), rep.epsilon, 1e-12));
            assert!(rep.epsilon >= 0.0);
        }
    }

    #[test]
    fn params_validation() {
        assert!(BoundParams::binary(10, 1, 0.0, true).is_err());
        assert!(BoundParams::binary(10, 1, 1.0, true).is_err());
        assert!(BoundParams::binary(0, 1, 0.1, true).is_err());
        assert!(BoundParams::new(1.0, 1.0, 10, 1, 0.1, false).is_err());
        let q = BoundParams::new(-2.0, 1.0, 10, 1, 0.1, false).unwrap();
        assert_eq!((q.c(), q.z()), (3.0, 2.0));
        let q = BoundParams { centralize: true, ..q };
        assert_eq!(q.z(), 1.5);
    }
}
