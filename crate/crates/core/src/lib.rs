//! Exact n-sample Monte-Carlo empirical Rademacher averages for itemset
//! families.
//!
//! The crate computes, by branch-and-bound over the itemset lattice, the
//! per-draw suprema of the signed sums `Σ_i σ_{j,i} f(s_i)` for every itemset
//! indicator `f`, and turns them into probabilistic upper bounds on the
//! supremum deviation between sample frequencies and true frequencies. On top
//! of that it mines true frequent itemsets with family-wise error control.
//!
//! Everything here is `no_std` + `alloc`: no IO, no clocks, no threads. File
//! formats, timing and the command-line driver live in the `rademine` crate.
//!
//! Module map:
//!
//! * [`dataset`] - transactions, FIMI parsing, seeded resampling, statistics.
//! * [`rademacher`] - the seeded `n × m` sign matrix, packed one bit per sign.
//! * [`lattice`] - itemset nodes with tid-lists, canonical children, discrepancy
//!   statistics.
//! * [`engine`] - the branch-and-bound supremum computation.
//! * [`bounds`] - closed-form tail bounds turning an average into an ε.
//! * [`hybrid`] - truncated exploration of the frequent part plus a uniform tail
//!   for the infrequent remainder.
//! * [`tfp`] - true frequent pattern mining with no false positives w.h.p.
//! * [`oracle`] - brute-force references used by tests and the acceptance run.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod dataset;
pub mod engine;
mod error;
pub mod hybrid;
pub mod lattice;
pub mod oracle;
pub mod rademacher;
pub mod tfp;

pub use crate::bounds::{BoundKind, BoundParams, BoundReport, BoundTerm};
pub use crate::dataset::{DatasetStats, ItemId, SampleDataset};
pub use crate::engine::{get_n_mcera, EngineConfig, McEraResult, Order};
pub use crate::error::Error;
pub use crate::hybrid::{hybrid_sd_bound, HybridConfig};
pub use crate::lattice::{Pattern, PatternNode};
pub use crate::rademacher::RademacherMatrix;
pub use crate::tfp::{tfp_baseline_massart, tfp_r, TfpConfig, TfpResult};
