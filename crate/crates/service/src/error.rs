use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use wntags::evaluation::EvaluationError;
use wntags::ontology::OntologyError;
use wntags::repository::RepositoryError;
use wntags::retrieval::RetrievalError;

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    pub status: StatusCode,
    /// Sense count reported with `too_few_senses`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            status,
            found: None,
        }
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<OntologyError> for ApiError {
    fn from(e: OntologyError) -> Self {
        let msg = e.to_string();
        match e {
            OntologyError::MalformedLine { .. } => Self::invalid("invalid_ontology_line", msg),
            OntologyError::DanglingPointer { .. } => Self::invalid("invalid_pointer", msg),
            OntologyError::DuplicateOffset(_) => Self::invalid("invalid_duplicate_synset", msg),
            OntologyError::UnknownSynset(_) => Self::not_found("unknown_synset", msg),
            OntologyError::UnknownSense(_) => Self::invalid("unknown_sense", msg),
            OntologyError::InvalidPos(_) => Self::invalid("invalid_pos", msg),
            OntologyError::InvalidSynsetId(_) => Self::invalid("invalid_synset_id", msg),
            OntologyError::ScoreOutOfRange { .. } => Self::invalid("score_out_of_range", msg),
            OntologyError::DistanceTooLarge(_) => Self::invalid("max_distance_out_of_range", msg),
            OntologyError::MissingFile(_) => Self::not_found("unknown_file", msg),
            OntologyError::Io(_) => Self::internal(msg),
        }
    }
}

impl From<RepositoryError> for ApiError {
    fn from(e: RepositoryError) -> Self {
        let msg = e.to_string();
        match e {
            RepositoryError::EmotionOutOfRange { .. } => Self::invalid("emotion_out_of_range", msg),
            RepositoryError::EmptyUri => Self::invalid("invalid_uri", msg),
            RepositoryError::UnknownImage(_) => Self::not_found("unknown_image", msg),
            RepositoryError::UnknownSense(_) => Self::invalid("unknown_sense", msg),
            RepositoryError::WeightOutOfRange(_) => Self::invalid("weight_out_of_range", msg),
            RepositoryError::EmptyRatings => Self::invalid("invalid_ratings", msg),
            RepositoryError::TooFewSenses { found } => Self {
                found: Some(found),
                ..Self::new(StatusCode::CONFLICT, "too_few_senses", msg)
            },
            RepositoryError::UncommittedImage(_) => {
                Self::new(StatusCode::CONFLICT, "uncommitted_image", msg)
            }
            RepositoryError::InsufficientRaters { .. } => Self::invalid("insufficient_raters", msg),
            RepositoryError::UntaggedSense(_) => Self::not_found("unknown_tag", msg),
            RepositoryError::InvalidBins => Self::invalid("invalid_bins", msg),
            RepositoryError::MalformedRecord { .. } => Self::invalid("invalid_record", msg),
            RepositoryError::Ontology(inner) => inner.into(),
            RepositoryError::Io(_) => Self::internal(msg),
        }
    }
}

impl From<RetrievalError> for ApiError {
    fn from(e: RetrievalError) -> Self {
        let msg = e.to_string();
        match e {
            RetrievalError::EmptyQuery => Self::new(StatusCode::BAD_REQUEST, "empty_query", msg),
            RetrievalError::UncommittedImage(_) => {
                Self::new(StatusCode::CONFLICT, "uncommitted_image", msg)
            }
            RetrievalError::InvalidRange(_) => Self::invalid("invalid_range", msg),
            RetrievalError::InvalidFraction(_) => Self::invalid("invalid_fraction", msg),
            RetrievalError::Ontology(inner) => inner.into(),
        }
    }
}

impl From<EvaluationError> for ApiError {
    fn from(e: EvaluationError) -> Self {
        let msg = e.to_string();
        match e {
            EvaluationError::InvalidK => Self::invalid("invalid_rank", msg),
            EvaluationError::EmptyJudgment => Self::invalid("invalid_judgment", msg),
            EvaluationError::NoQueries => Self::invalid("invalid_benchmark", msg),
            EvaluationError::UnknownImage(_) => Self::not_found("unknown_image", msg),
            EvaluationError::InvalidSpec(_) => Self::invalid("invalid_spec", msg),
            EvaluationError::MalformedLine { .. } => Self::invalid("invalid_judgment_line", msg),
            EvaluationError::Retrieval(inner) => inner.into(),
            EvaluationError::Repository(inner) => inner.into(),
            EvaluationError::Io(_) => Self::internal(msg),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let msg = r.body_text();
        match r {
            JsonRejection::MissingJsonContentType(_) => {
                Self::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media_type", msg)
            }
            JsonRejection::JsonSyntaxError(_) => {
                Self::new(StatusCode::BAD_REQUEST, "malformed_json", msg)
            }
            _ => Self::invalid("invalid_body", msg),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Self::invalid("invalid_query_string", r.body_text())
    }
}
