//! Crate-wide error type.

use std::fmt;

use crate::codec::DecodeError;
use crate::ingest::IngestError;
use crate::snapshot::SnapshotError;
use crate::vectorize::LexiconError;

#[derive(Debug)]
pub enum Error {
    /// A point carries a coordinate index at or beyond the configured dimensionality.
    DimensionExceeded { key: u32, dim: u32 },
    /// A sparse vector violates its construction invariants.
    InvalidPoint(&'static str),
    /// Exclude/unmerge would drive a summary's point count below zero.
    StatsUnderflow,
    /// The requested statistic is undefined on an empty summary.
    StatsEmpty,
    /// The three side lengths do not form a proper triangle.
    DegenerateTriangle,
    /// The two balls share a center, so no border plane exists between them.
    DegeneratePlane,
    /// An operation that needs at least one point received none.
    EmptyPointSet,
    /// An exact small-set operation received more points than it handles.
    TooManyPoints { n: usize, max: usize },
    /// A split needs at least two entries.
    SplitTooFew,
    /// Exhaustive split refused: entry count exceeds the brute-force cutoff.
    SplitTooLarge { n: usize, cutoff: usize },
    /// Invalid tree configuration.
    Config(&'static str),
    /// Browse depth exceeds the tree height.
    BrowseDepth { depth: usize, height: usize },
    Decode(DecodeError),
    Snapshot(SnapshotError),
    Ingest(IngestError),
    Lexicon(LexiconError),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionExceeded { key, dim } => {
                write!(f, "coordinate index {key} out of range for dimensionality {dim}")
            }
            Error::InvalidPoint(reason) => write!(f, "invalid sparse point: {reason}"),
            Error::StatsUnderflow => write!(f, "cannot exclude from an empty summary"),
            Error::StatsEmpty => write!(f, "statistic undefined on an empty summary"),
            Error::DegenerateTriangle => write!(f, "side lengths form a degenerate triangle"),
            Error::DegeneratePlane => {
                write!(f, "balls share a center; border plane is undefined")
            }
            Error::EmptyPointSet => write!(f, "operation requires at least one point"),
            Error::TooManyPoints { n, max } => {
                write!(f, "exact construction limited to {max} points, got {n}")
            }
            Error::SplitTooFew => write!(f, "split requires at least two entries"),
            Error::SplitTooLarge { n, cutoff } => {
                write!(f, "refusing exhaustive split of {n} entries (cutoff {cutoff})")
            }
            Error::Config(reason) => write!(f, "invalid tree configuration: {reason}"),
            Error::BrowseDepth { depth, height } => {
                write!(f, "browse depth {depth} exceeds tree height {height}")
            }
            Error::Decode(e) => write!(f, "point decode error: {e}"),
            Error::Snapshot(e) => write!(f, "snapshot error: {e}"),
            Error::Ingest(e) => write!(f, "{e}"),
            Error::Lexicon(e) => write!(f, "{e}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<DecodeError> for Error {
    fn from(e: DecodeError) -> Self {
        Error::Decode(e)
    }
}

impl From<SnapshotError> for Error {
    fn from(e: SnapshotError) -> Self {
        Error::Snapshot(e)
    }
}

impl From<IngestError> for Error {
    fn from(e: IngestError) -> Self {
        Error::Ingest(e)
    }
}

impl From<LexiconError> for Error {
    fn from(e: LexiconError) -> Self {
        Error::Lexicon(e)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
