//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised while loading data or running an analysis.
///
/// Variants fall in two families: *validation* errors (the input is
/// malformed or violates a precondition) and *numerical* errors (the input
/// is well formed but the computation degenerates). [`Error::is_validation`]
/// tells them apart; the CLI maps them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("table is empty")]
    EmptyTable,

    #[error("invalid measurement key {0:?}: keys must be alphanumeric")]
    InvalidKey(String),

    #[error("duplicate animal id {id:?} on line {line}")]
    DuplicateAnimal { id: String, line: u64 },

    #[error("duplicate column {0}")]
    DuplicateColumn(String),

    #[error("missing value for column {column} on line {line}")]
    MissingCell { column: String, line: u64 },

    #[error("non-numeric value {value:?} for column {column} on line {line}")]
    NonNumeric {
        column: String,
        line: u64,
        value: String,
    },

    #[error("non-finite value for column {column} on line {line}")]
    NonFinite { column: String, line: u64 },

    #[error("row on line {line} has {found} fields, header has {expected}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("unknown column {0}")]
    UnknownKey(String),

    #[error("SS is derived from S1, S2 and S3 and may not be supplied alongside them")]
    DerivedColumnSupplied,

    #[error("animal {animal:?} lacks key {key} that other animals have")]
    RaggedReplicates { animal: String, key: String },

    #[error("replicate file header must be `animal_id,key,value,source`, found `{0}`")]
    ReplicateHeader(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("column {0} has zero variance")]
    ZeroVariance(String),

    #[error("correlation between {left} and {right} undefined: {source}")]
    PairCorrelation {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("requested {requested} features but only {available} candidates remain")]
    NotEnoughCandidates { requested: usize, available: usize },

    #[error("invalid cluster count k={k} for {n} points")]
    InvalidK { k: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("empty k range")]
    EmptyRange,

    #[error("knee detection needs at least 3 points, got {0}")]
    TooFewKneePoints(usize),

    #[error("need at least two groups, found {0}")]
    TooFewGroups(usize),

    #[error("labels must lie in 1..=k")]
    InvalidLabel,

    #[error("argument out of domain: {0}")]
    Domain(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// `true` for malformed input, `false` for errors raised by a
    /// computation on valid input.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ZeroVariance(_)
                | Error::PairCorrelation { .. }
                | Error::NonFiniteInput
                | Error::TooFewKneePoints(_)
                | Error::Domain(_)
        )
    }
}
