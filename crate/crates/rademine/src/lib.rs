//! File formats, run records and the command-line driver around
//! [`rademine_core`].
//!
//! * [`fimi`] - loading FIMI transaction files.
//! * [`record`] - the per-run record and its CSV and JSON encodings.
//! * [`run`] - one job: sample, draw signs, compute, report.
//! * [`cli`] - flag parsing, validation and batch execution.

pub mod cli;
mod error;
pub mod fimi;
pub mod record;
pub mod run;

pub use crate::error::AppError;
