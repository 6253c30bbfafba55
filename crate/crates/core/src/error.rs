use core::fmt;

/// Everything that can go wrong inside the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A FIMI line held something other than a non-negative integer.
    Parse { line: usize, token: alloc::string::String },
    /// Resampling from a dataset without transactions.
    EmptySource,
    /// A zero dimension, or a matrix whose width does not match the sample.
    Dimension { expected: usize, found: usize },
    /// Row or transaction index outside the matrix.
    Index { index: usize, bound: usize },
    /// A sign entry other than -1 or +1.
    InvalidSign(i64),
    /// Inconsistent or out-of-range configuration.
    Config(&'static str),
    /// The brute-force oracle refuses alphabets above its hard cap.
    AlphabetTooLarge { size: usize, cap: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, token } => {
                write!(f, "line {line}: expected a non-negative integer item id, found {token:?}")
            }
            Error::EmptySource => f.write_str("cannot sample from a dataset with no transactions"),
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Index { index, bound } => write!(f, "index {index} out of range (bound {bound})"),
            Error::InvalidSign(v) => write!(f, "rademacher entries must be -1 or +1, found {v}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::AlphabetTooLarge { size, cap } => {
                write!(f, "alphabet of {size} items exceeds the brute-force cap of {cap}")
            }
        }
    }
}

impl core::error::Error for Error {}
