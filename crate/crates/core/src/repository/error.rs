use thiserror::Error;

use super::ImageId;
use crate::ontology::OntologyError;

#[derive(Debug, Error)]
pub enum RepositoryError {
    #[error("{component} {value} outside [1, 9]")]
    EmotionOutOfRange { component: &'static str, value: f64 },
    #[error("image uri is empty")]
    EmptyUri,
    #[error("unknown image {0}")]
    UnknownImage(ImageId),
    #[error("unknown sense {0}")]
    UnknownSense(String),
    #[error("weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("no ratings to average")]
    EmptyRatings,
    #[error("image needs at least 3 distinct senses, found {found}")]
    TooFewSenses { found: usize },
    #[error("image {0} is not committed")]
    UncommittedImage(ImageId),
    #[error("agreement needs at least 2 raters, found {found}")]
    InsufficientRaters { found: usize },
    #[error("sense {0} is not tagged on this image")]
    UntaggedSense(String),
    #[error("bin count must be positive")]
    InvalidBins,
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
