use std::cmp::Ordering;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parse_query, ImageView, Query, RankedResult, RetrievalError, Scorer, DEFAULT_MAX_DISTANCE};
use crate::ontology::SimilarityTable;
use crate::repository::{EmotionTuple, ImageRecord, Repository};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    #[default]
    Relevance,
    RawScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub max_distance: u32,
    /// Results must have relevance strictly above this.
    pub min_relevance: f64,
    pub limit: Option<usize>,
    pub rank_by: RankBy,
    /// Score each image on a random fraction of its tags: `(fraction, seed)`.
    pub subsample: Option<(f64, u64)>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_distance: DEFAULT_MAX_DISTANCE,
            min_relevance: 0.0,
            limit: None,
            rank_by: RankBy::Relevance,
            subsample: None,
        }
    }
}

/// Inclusive bounds on one affect component, written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub min: f64,
    pub max: f64,
}

impl ValueRange {
    pub fn new(min: f64, max: f64) -> Result<Self, RetrievalError> {
        if !(1.0..=9.0).contains(&min) || !(1.0..=9.0).contains(&max) {
            return Err(RetrievalError::InvalidRange(format!(
                "{min}..{max} outside [1, 9]"
            )));
        }
        if min > max {
            return Err(RetrievalError::InvalidRange(format!("{min} > {max}")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }
}

impl FromStr for ValueRange {
    type Err = RetrievalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RetrievalError::InvalidRange(format!("expected a..b, got {s:?}"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        ValueRange::new(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AffectFilter {
    pub valence: Option<ValueRange>,
    pub arousal: Option<ValueRange>,
    pub dominance: Option<ValueRange>,
}

impl AffectFilter {
    pub fn is_empty(&self) -> bool {
        self.valence.is_none() && self.arousal.is_none() && self.dominance.is_none()
    }

    /// Images without an emotion tuple fail any non-empty filter.
    pub fn accepts(&self, emotion: Option<&EmotionTuple>) -> bool {
        if self.is_empty() {
            return true;
        }
        let Some(e) = emotion else { return false };
        let ok = |r: &Option<ValueRange>, v| r.is_none_or(|r: ValueRange| r.contains(v));
        ok(&self.valence, e.valence) && ok(&self.arousal, e.arousal) && ok(&self.dominance, e.dominance)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Filters {
    pub affect: AffectFilter,
    /// Case-insensitive exact match on the image keyword.
    pub keyword: Option<String>,
}

impl Filters {
    pub fn accepts(&self, record: &ImageRecord) -> bool {
        if !self.affect.accepts(record.emotion.as_ref()) {
            return false;
        }
        match &self.keyword {
            None => true,
            Some(k) => record
                .keyword
                .as_deref()
                .is_some_and(|rk| rk.eq_ignore_ascii_case(k.trim())),
        }
    }
}

/// Per-image seed derived from a run seed, so subsamples do not depend on
/// iteration order.
pub fn subsample_seed(seed: u64, image: crate::repository::ImageId) -> u64 {
    seed ^ image.0.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Keeps `ceil(fraction × n)` of the image's tags, chosen uniformly, in
/// their original order.
pub fn subsample_tags(image: &ImageRecord, fraction: f64, seed: u64) -> Result<ImageView, RetrievalError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(RetrievalError::InvalidFraction(fraction));
    }
    let mut view = ImageView::from_record(image)?;
    let n = view.tags.len();
    let k = ((fraction * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = rand::seq::index::sample(&mut rng, n, k).into_vec();
    keep.sort_unstable();
    view.tags = keep.into_iter().map(|i| view.tags[i].clone()).collect();
    Ok(view)
}

fn order(rank_by: RankBy) -> impl Fn(&RankedResult, &RankedResult) -> Ordering {
    move |a, b| {
        let (x, y) = match rank_by {
            RankBy::Relevance => (a.relevance, b.relevance),
            RankBy::RawScore => (a.raw_score, b.raw_score),
        };
        y.total_cmp(&x).then(a.image_id.cmp(&b.image_id))
    }
}

/// Scores prepared views in parallel and ranks them.
pub fn search_views(
    query: &Query,
    views: &[ImageView],
    graph: &crate::ontology::OntologyGraph,
    table: Option<&SimilarityTable>,
    options: &SearchOptions,
) -> Result<Vec<RankedResult>, RetrievalError> {
    let scorer = Scorer::new(query, graph, table, options.max_distance)?;
    let mut results: Vec<RankedResult> = views
        .par_iter()
        .map(|v| scorer.score(v))
        .filter(|r| r.raw_score > 0.0 && r.relevance > options.min_relevance)
        .collect();
    results.sort_by(order(options.rank_by));
    if let Some(limit) = options.limit {
        results.truncate(limit);
    }
    Ok(results)
}

pub fn search_with_filters(
    raw_text: &str,
    repo: &Repository,
    table: Option<&SimilarityTable>,
    options: &SearchOptions,
    filters: &Filters,
) -> Result<Vec<RankedResult>, RetrievalError> {
    let graph = repo.ontology();
    let query = parse_query(raw_text, graph)?;
    let views = repo
        .committed_images()
        .filter(|r| filters.accepts(r))
        .map(|r| match options.subsample {
            Some((fraction, seed)) => subsample_tags(r, fraction, subsample_seed(seed, r.id)),
            None => ImageView::from_record(r),
        })
        .collect::<Result<Vec<_>, _>>()?;
    search_views(&query, &views, graph, table, options)
}

/// Ranks every committed image against `raw_text`.
pub fn search(
    raw_text: &str,
    repo: &Repository,
    table: Option<&SimilarityTable>,
    options: &SearchOptions,
) -> Result<Vec<RankedResult>, RetrievalError> {
    search_with_filters(raw_text, repo, table, options, &Filters::default())
}
