//! Crate-wide error type.

use std::path::PathBuf;

/// One violation found while validating a scene config document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    /// JSON pointer to the offending value, e.g. `/events/0/snr`.
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.pointer, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Positions outside the room, source coinciding with the mic, and similar.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A direction cannot be derived because the point equals the origin.
    #[error("degenerate direction: point coincides with origin")]
    DegenerateDirection,

    /// A parameter is outside its documented range.
    #[error("{what} out of range: {value} not in [{min}, {max}]")]
    Range {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Mismatched sample rates, channel counts, or layouts.
    #[error("format error: {0}")]
    Format(String),

    /// The capsule layout cannot be inverted to first order.
    #[error("ill-conditioned capsule layout: condition number {cond:.3e} >= {limit:.1e}")]
    Conditioning { cond: f64, limit: f64 },

    /// The analysis frame is too quiet to carry a direction.
    #[error("no estimate: frame energy below silence threshold")]
    NoEstimate,

    /// A signal-analysis precondition does not hold.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// The event is silent and cannot be scaled to a target level.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Corpus scanning or label resolution failed.
    #[error("corpus error: {0}")]
    Corpus(String),

    /// A distribution could not produce a value.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Malformed DCASE CSV.
    #[error("{path}:{line}: {message}")]
    CsvParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Malformed WAV data, with the byte offset where parsing failed.
    #[error("{path}: malformed WAV at byte {offset}: {message}")]
    Wav {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    /// Scene config failed validation; every violation is listed.
    #[error("invalid scene config:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Schema(Vec<SchemaViolation>),

    /// A dataset or RIR database directory does not have the expected layout.
    #[error("layout error: {0}")]
    Layout(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
