//! FIMI files: one transaction per line, whitespace-separated item ids.

use std::io::Read;
use std::path::Path;

use rademine_core::SampleDataset;

use crate::error::AppError;

pub fn load(path: &Path) -> Result<SampleDataset, AppError> {
    let io = |source| AppError::Io { path: path.to_path_buf(), source };
    let mut raw = Vec::new();
    std::fs::File::open(path).map_err(io)?.read_to_end(&mut raw).map_err(io)?;
    SampleDataset::parse_fimi(&raw).map_err(|source| AppError::Data { path: path.to_path_buf(), source })
}

pub fn read(mut reader: impl Read) -> Result<SampleDataset, AppError> {
    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    Ok(SampleDataset::parse_fimi(&raw)?)
}

/// The file stem, used as the dataset id in records.
pub fn dataset_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}
