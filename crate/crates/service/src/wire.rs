//! JSON shapes. Field names follow the persistence file.

use serde::{Deserialize, Serialize};

use wntags::ontology::{OntologyGraph, Pos, Sense};
use wntags::repository::{
    AgreementReport, EmotionTuple, ImageId, ImageRecord, StoredRating,
};
use wntags::retrieval::{MatchDetail, RankedResult};

/// Sense identity on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSense {
    pub lemma: String,
    pub pos: Pos,
    pub offset: u32,
}

impl From<&Sense> for WireSense {
    fn from(s: &Sense) -> Self {
        Self {
            lemma: s.lemma.clone(),
            pos: s.synset.pos,
            offset: s.synset.offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagView {
    pub lemma: String,
    pub pos: Pos,
    pub offset: u32,
    pub mean_weight: f64,
    pub raters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratings: Option<Vec<StoredRating>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageResource {
    pub id: ImageId,
    pub uri: String,
    pub keyword: Option<String>,
    pub emotion: Option<EmotionTuple>,
    pub tags: Vec<TagView>,
    pub committed: bool,
}

impl ImageResource {
    fn build(r: &ImageRecord, with_ratings: bool) -> Self {
        let tags = r
            .annotations
            .iter()
            .map(|a| TagView {
                lemma: a.sense.lemma.clone(),
                pos: a.sense.synset.pos,
                offset: a.sense.synset.offset,
                mean_weight: a.mean_weight(),
                raters: a.ratings.len(),
                ratings: with_ratings.then(|| {
                    a.ratings
                        .iter()
                        .map(|w| StoredRating {
                            annotator: w.annotator.clone(),
                            weight: w.weight,
                            at: w.recorded_at,
                        })
                        .collect()
                }),
            })
            .collect();
        Self {
            id: r.id,
            uri: r.uri.clone(),
            keyword: r.keyword.clone(),
            emotion: r.emotion,
            tags,
            committed: r.committed,
        }
    }

    /// Per-tag mean weight and rater count only.
    pub fn summary(r: &ImageRecord) -> Self {
        Self::build(r, false)
    }

    pub fn detail(r: &ImageRecord) -> Self {
        Self::build(r, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewImage {
    pub uri: String,
    #[serde(default)]
    pub keyword: Option<String>,
    #[serde(default)]
    pub emotion: Option<EmotionTuple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewAnnotation {
    pub lemma: String,
    pub pos: String,
    pub offset: u32,
    pub weight: f64,
    pub annotator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchView {
    pub query_sense: WireSense,
    pub image_sense: WireSense,
    pub mean_weight: f64,
    pub similarity: f64,
    pub contribution: f64,
}

impl From<&MatchDetail> for MatchView {
    fn from(m: &MatchDetail) -> Self {
        Self {
            query_sense: (&m.query_sense).into(),
            image_sense: (&m.image_sense).into(),
            mean_weight: m.mean_weight,
            similarity: m.similarity,
            contribution: m.contribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub rank: usize,
    pub image_id: ImageId,
    pub raw_score: f64,
    pub relevance: f64,
    pub uri: String,
    pub keyword: Option<String>,
    pub emotion: Option<EmotionTuple>,
    pub matches: Vec<MatchView>,
}

impl SearchHit {
    pub fn new(rank: usize, result: &RankedResult, record: &ImageRecord) -> Self {
        Self {
            rank,
            image_id: result.image_id,
            raw_score: result.raw_score,
            relevance: result.relevance,
            uri: record.uri.clone(),
            keyword: record.keyword.clone(),
            emotion: record.emotion,
            matches: result.matches.iter().map(MatchView::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenseEntry {
    pub lemma: String,
    pub pos: Pos,
    pub offset: u32,
    /// 1-based rank of this synset among the lemma's senses for its pos.
    pub sense_number: u32,
    pub gloss: String,
    pub synonyms: Vec<String>,
    /// True when the lemma was reached from an inflected surface form.
    pub stemmed: bool,
}

impl SenseEntry {
    pub fn new(graph: &OntologyGraph, sense: &Sense, stemmed: bool) -> Option<Self> {
        let synset = graph.synset(sense.synset)?;
        Some(Self {
            lemma: sense.lemma.clone(),
            pos: sense.synset.pos,
            offset: sense.synset.offset,
            sense_number: graph.sense_number(sense)?,
            gloss: synset.gloss.clone(),
            synonyms: synset.lemmas.clone(),
            stemmed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagAgreementView {
    pub image: ImageId,
    pub lemma: String,
    pub pos: Pos,
    pub offset: u32,
    pub raters: usize,
    pub kappa: f64,
    pub inadequate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementView {
    pub bins: usize,
    pub threshold: f64,
    pub overall: Option<f64>,
    pub tags: Vec<TagAgreementView>,
}

impl AgreementView {
    pub fn new(report: &AgreementReport, bins: usize, threshold: f64) -> Self {
        Self {
            bins,
            threshold,
            overall: report.overall,
            tags: report
                .tags
                .iter()
                .map(|t| TagAgreementView {
                    image: t.image,
                    lemma: t.sense.lemma.clone(),
                    pos: t.sense.synset.pos,
                    offset: t.sense.synset.offset,
                    raters: t.raters,
                    kappa: t.kappa,
                    inadequate: t.inadequate,
                })
                .collect(),
        }
    }
}
