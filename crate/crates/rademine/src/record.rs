//! One row of results, and the output encodings.
//!
//! Floats are written with 17 significant digits in both encodings so that a
//! record round-trips exactly and identical runs produce identical bytes.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::AppError;

pub const CSV_HEADER: [&str; 14] = [
    "dataset",
    "m",
    "n",
    "delta",
    "seed",
    "mode",
    "bound_kind",
    "mcera",
    "epsilon",
    "nodes_explored",
    "elapsed_ms",
    "beta",
    "theta",
    "pattern_count",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub dataset: String,
    pub m: usize,
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub mode: String,
    pub bound_kind: Option<String>,
    pub mcera: Option<f64>,
    pub epsilon: Option<f64>,
    pub nodes_explored: Option<usize>,
    pub elapsed_ms: Option<f64>,
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    pub pattern_count: Option<usize>,
}

impl RunRecord {
    pub fn csv_fields(&self) -> [String; 14] {
        fn opt<T>(v: &Option<T>, f: impl Fn(&T) -> String) -> String {
            v.as_ref().map_or_else(String::new, f)
        }
        [
            self.dataset.clone(),
            self.m.to_string(),
            self.n.to_string(),
            fmt_f64(self.delta),
            self.seed.to_string(),
            self.mode.clone(),
            opt(&self.bound_kind, Clone::clone),
            opt(&self.mcera, |v| fmt_f64(*v)),
            opt(&self.epsilon, |v| fmt_f64(*v)),
            opt(&self.nodes_explored, ToString::to_string),
            opt(&self.elapsed_ms, |v| fmt_f64(*v)),
            opt(&self.beta, |v| fmt_f64(*v)),
            opt(&self.theta, |v| fmt_f64(*v)),
            opt(&self.pattern_count, ToString::to_string),
        ]
    }
}

/// 17 significant digits in scientific notation; `inf`/`nan` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON on one line, floats at 17 significant digits. Non-finite
/// floats become `null`.
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String, AppError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Header plus one row per record.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord], header: bool) -> Result<(), AppError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Appends rows to `path`, writing the header only when the file is new or
/// empty. Existing bytes are never touched.
pub fn append_csv(path: &Path, records: &[RunRecord]) -> Result<(), AppError> {
    let io_err = |source| AppError::Io { path: path.to_path_buf(), source };
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
    let empty = file.metadata().map_err(io_err)?.len() == 0;
    write_csv(file, records, empty)
}
