use std::path::PathBuf;

use thiserror::Error;

use super::SynsetId;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("{source_name}:{line}: {reason}")]
    MalformedLine {
        source_name: String,
        line: usize,
        reason: String,
    },
    #[error("pointer from {source_id} to unknown synset {target}")]
    DanglingPointer { source_id: SynsetId, target: SynsetId },
    #[error("duplicate synset {0}")]
    DuplicateOffset(SynsetId),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
    #[error("unknown sense {0}")]
    UnknownSense(String),
    #[error("invalid part of speech {0:?}")]
    InvalidPos(String),
    #[error("invalid synset id {0:?}")]
    InvalidSynsetId(String),
    #[error("{source_name}:{line}: score {score} outside [0, 1]")]
    ScoreOutOfRange {
        source_name: String,
        line: usize,
        score: f64,
    },
    #[error("node distance {0} exceeds the cap of 30")]
    DistanceTooLarge(u32),
    #[error("missing ontology file {0}")]
    MissingFile(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl OntologyError {
    pub(crate) fn malformed(source_name: &str, line: usize, reason: impl Into<String>) -> Self {
        OntologyError::MalformedLine {
            source_name: source_name.to_string(),
            line,
            reason: reason.into(),
        }
    }
}
