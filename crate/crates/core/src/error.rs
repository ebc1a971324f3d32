use thiserror::Error;

use crate::framework::SchemeTag;
use crate::geometry::GeometryError;

pub type Result<T, E = HbatError> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq)]
pub enum HbatError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error("k = {k} outside the allowed range {min}..={max} for {scheme}")]
    KOutOfRange { scheme: SchemeTag, k: usize, min: usize, max: usize },

    #[error("k too large for scheme: no valid sweetword set after {attempts} attempts")]
    KTooLarge { attempts: usize },

    #[error("sweetword entries are not pairwise distinct (entries {0} and {1})")]
    DuplicateSweetword(usize, usize),

    #[error("invalid secret for {scheme}: {reason}")]
    InvalidSecret { scheme: SchemeTag, reason: String },

    #[error("sweetword set violates scheme constraints: {0}")]
    InvalidSweetwordSet(String),

    #[error("generation timeout after {iterations} iterations")]
    GenerationTimeout { iterations: usize },

    #[error("challenge did not separate the sweetwords: sweetwords {0:?} all matched")]
    AmbiguousIdentification(Vec<usize>),

    #[error("incomplete transcript: expected {expected} responses, got {got}")]
    IncompleteTranscript { expected: usize, got: usize },

    #[error("no record for user {0:?}")]
    NoRecord(String),

    #[error("character {0:?} is not in the grid")]
    UnknownCharacter(char),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("malformed record: {0}")]
    Malformed(String),

    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
}
