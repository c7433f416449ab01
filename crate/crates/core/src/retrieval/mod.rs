//! Query parsing and exhaustive weighted-similarity ranking.
//!
//! An image's score for a query is the sum, over every (query sense, tag)
//! pair, of the tag's mean weight times the pair similarity. Relevance
//! divides that by `|query senses| × Σ mean weights`, which bounds it to
//! [0, 1] and keeps heavily tagged images from winning on volume alone.

mod query;
mod score;
mod search;

use serde::Serialize;
use thiserror::Error;

use crate::ontology::{OntologyError, Sense};
use crate::repository::{ImageId, ImageRecord};

pub use query::{parse_query, tokenize, Query};
pub use score::{score_image, score_view, Scorer};
pub use search::{
    search, search_views, search_with_filters, subsample_seed, subsample_tags, AffectFilter,
    Filters, RankBy, SearchOptions, ValueRange,
};

/// Default neighbourhood / similarity cutoff for searches.
pub const DEFAULT_MAX_DISTANCE: u32 = 10;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("query resolves to no known sense")]
    EmptyQuery,
    #[error("image {0} is not committed")]
    UncommittedImage(ImageId),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("subsample fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchDetail {
    pub query_sense: Sense,
    pub image_sense: Sense,
    pub mean_weight: f64,
    pub similarity: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResult {
    pub image_id: ImageId,
    pub raw_score: f64,
    pub relevance: f64,
    /// Pairs with non-zero similarity, query senses outer, tags inner.
    pub matches: Vec<MatchDetail>,
}

/// The tags an image is scored on: every tag with its mean weight, or a
/// random subset of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageView {
    pub id: ImageId,
    pub tags: Vec<(Sense, f64)>,
}

impl ImageView {
    pub fn from_record(record: &ImageRecord) -> Result<ImageView, RetrievalError> {
        if !record.committed {
            return Err(RetrievalError::UncommittedImage(record.id));
        }
        Ok(ImageView {
            id: record.id,
            tags: record.weighted_senses(),
        })
    }

    pub fn weight_mass(&self) -> f64 {
        self.tags.iter().map(|(_, w)| w).sum()
    }
}
