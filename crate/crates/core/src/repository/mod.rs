//! Image records with weighted, multi-annotator sense tags.
//!
//! Writes go through `&mut Repository`; wrap it in a lock to share it between
//! a single writer and many readers.

mod agreement;
mod error;
mod persist;

mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ontology::{neighborhood, NeighborhoodConfig, OntologyGraph, Sense};

pub use agreement::{fleiss_kappa, weight_bin, AgreementConfig, AgreementReport, TagAgreement};
pub use error::RepositoryError;
pub use persist::{StoredRating, StoredRecord, StoredTag};
pub use stats::{corpus_stats, CorpusStats};

/// Minimum number of distinct senses before an image becomes searchable.
pub const MIN_COMMIT_SENSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageId(pub u64);

impl fmt::Display for ImageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ImageId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(ImageId)
    }
}

/// Circumplex affect coordinates, each on the 1..=9 rating scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionTuple {
    #[serde(rename = "val")]
    pub valence: f64,
    #[serde(rename = "ar")]
    pub arousal: f64,
    #[serde(rename = "dom")]
    pub dominance: f64,
}

pub const AFFECT_MIN: f64 = 1.0;
pub const AFFECT_MAX: f64 = 9.0;

impl EmotionTuple {
    pub fn new(valence: f64, arousal: f64, dominance: f64) -> Result<Self, RepositoryError> {
        let tuple = Self {
            valence,
            arousal,
            dominance,
        };
        tuple.validate()?;
        Ok(tuple)
    }

    pub fn validate(&self) -> Result<(), RepositoryError> {
        for (component, value) in [
            ("valence", self.valence),
            ("arousal", self.arousal),
            ("dominance", self.dominance),
        ] {
            if !(AFFECT_MIN..=AFFECT_MAX).contains(&value) {
                return Err(RepositoryError::EmotionOutOfRange { component, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRating {
    pub annotator: String,
    pub weight: f64,
    pub recorded_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedSense {
    pub sense: Sense,
    pub ratings: Vec<WeightRating>,
}

impl AnnotatedSense {
    pub fn mean_weight(&self) -> f64 {
        // ratings are never empty for a stored tag
        mean_weight(&self.ratings).unwrap_or(0.0)
    }
}

/// Arithmetic mean of the rating weights.
pub fn mean_weight(ratings: &[WeightRating]) -> Result<f64, RepositoryError> {
    if ratings.is_empty() {
        return Err(RepositoryError::EmptyRatings);
    }
    let sum: f64 = ratings.iter().map(|r| r.weight).sum();
    Ok(sum / ratings.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub id: ImageId,
    pub uri: String,
    pub keyword: Option<String>,
    pub emotion: Option<EmotionTuple>,
    pub annotations: Vec<AnnotatedSense>,
    pub committed: bool,
}

impl ImageRecord {
    pub fn annotation(&self, sense: &Sense) -> Option<&AnnotatedSense> {
        self.annotations.iter().find(|a| a.sense == *sense)
    }

    pub fn sense_count(&self) -> usize {
        self.annotations.len()
    }

    /// Each tag sense with its mean weight, in annotation order.
    pub fn weighted_senses(&self) -> Vec<(Sense, f64)> {
        self.annotations
            .iter()
            .map(|a| (a.sense.clone(), a.mean_weight()))
            .collect()
    }
}

pub(crate) fn check_weight(weight: f64) -> Result<(), RepositoryError> {
    if (0.0..=1.0).contains(&weight) {
        Ok(())
    } else {
        Err(RepositoryError::WeightOutOfRange(weight))
    }
}

fn clean_keyword(keyword: Option<String>) -> Option<String> {
    keyword
        .map(|k| k.trim().to_string())
        .filter(|k| !k.is_empty())
}

#[derive(Debug, Clone)]
pub struct Repository {
    ontology: Arc<OntologyGraph>,
    images: BTreeMap<ImageId, ImageRecord>,
    next_id: u64,
    vocabulary: BTreeMap<String, usize>,
}

impl PartialEq for Repository {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Repository {
    pub fn new(ontology: Arc<OntologyGraph>) -> Self {
        Self {
            ontology,
            images: BTreeMap::new(),
            next_id: 1,
            vocabulary: BTreeMap::new(),
        }
    }

    pub fn ontology(&self) -> &Arc<OntologyGraph> {
        &self.ontology
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, id: ImageId) -> Option<&ImageRecord> {
        self.images.get(&id)
    }

    /// All records in ascending id order.
    pub fn images(&self) -> impl Iterator<Item = &ImageRecord> {
        self.images.values()
    }

    pub fn committed_images(&self) -> impl Iterator<Item = &ImageRecord> {
        self.images.values().filter(|r| r.committed)
    }

    /// Distinct legacy keywords across all records.
    pub fn keyword_vocabulary(&self) -> BTreeSet<String> {
        self.vocabulary.keys().cloned().collect()
    }

    /// The vocabulary recomputed from scratch over all records.
    pub fn recompute_vocabulary(&self) -> BTreeSet<String> {
        self.images
            .values()
            .filter_map(|r| r.keyword.clone())
            .collect()
    }

    pub fn add_image(
        &mut self,
        uri: &str,
        keyword: Option<String>,
        emotion: Option<EmotionTuple>,
    ) -> Result<&ImageRecord, RepositoryError> {
        let uri = uri.trim();
        if uri.is_empty() {
            return Err(RepositoryError::EmptyUri);
        }
        if let Some(e) = &emotion {
            e.validate()?;
        }
        let id = ImageId(self.next_id);
        self.next_id += 1;
        let record = ImageRecord {
            id,
            uri: uri.to_string(),
            keyword: clean_keyword(keyword),
            emotion,
            annotations: Vec::new(),
            committed: false,
        };
        self.insert_record(record);
        Ok(&self.images[&id])
    }

    fn insert_record(&mut self, record: ImageRecord) {
        if let Some(k) = &record.keyword {
            *self.vocabulary.entry(k.clone()).or_default() += 1;
        }
        self.next_id = self.next_id.max(record.id.0 + 1);
        self.images.insert(record.id, record);
    }

    pub fn annotate(
        &mut self,
        id: ImageId,
        sense: Sense,
        weight: f64,
        annotator: &str,
    ) -> Result<&ImageRecord, RepositoryError> {
        self.annotate_at(id, sense, weight, annotator, Utc::now())
    }

    /// Records a rating. A second rating from the same annotator for the same
    /// sense replaces the first.
    pub fn annotate_at(
        &mut self,
        id: ImageId,
        sense: Sense,
        weight: f64,
        annotator: &str,
        at: DateTime<Utc>,
    ) -> Result<&ImageRecord, RepositoryError> {
        if !self.images.contains_key(&id) {
            return Err(RepositoryError::UnknownImage(id));
        }
        self.ontology
            .resolve_sense(&sense)
            .map_err(|_| RepositoryError::UnknownSense(sense.to_string()))?;
        check_weight(weight)?;
        let rating = WeightRating {
            annotator: annotator.to_string(),
            weight,
            recorded_at: at,
        };
        let record = self.images.get_mut(&id).expect("checked above");
        match record.annotations.iter_mut().find(|a| a.sense == sense) {
            Some(tag) => match tag.ratings.iter_mut().find(|r| r.annotator == annotator) {
                Some(existing) => *existing = rating,
                None => tag.ratings.push(rating),
            },
            None => record.annotations.push(AnnotatedSense {
                sense,
                ratings: vec![rating],
            }),
        }
        Ok(record)
    }

    /// Marks the image searchable once it carries enough distinct senses.
    pub fn commit(&mut self, id: ImageId) -> Result<&ImageRecord, RepositoryError> {
        let record = self
            .images
            .get_mut(&id)
            .ok_or(RepositoryError::UnknownImage(id))?;
        let found = record.sense_count();
        if found < MIN_COMMIT_SENSES {
            return Err(RepositoryError::TooFewSenses { found });
        }
        record.committed = true;
        Ok(record)
    }

    /// The image's tag senses united with the neighbourhood of every tag.
    /// Expanded senses carry no weights. A distance of 0 disables expansion,
    /// so the result is then exactly the tag senses.
    pub fn expanded_semantics(
        &self,
        id: ImageId,
        cfg: &NeighborhoodConfig,
    ) -> Result<BTreeSet<Sense>, RepositoryError> {
        let record = self.image(id).ok_or(RepositoryError::UnknownImage(id))?;
        if !record.committed {
            return Err(RepositoryError::UncommittedImage(id));
        }
        let mut out = BTreeSet::new();
        for tag in &record.annotations {
            out.insert(tag.sense.clone());
            if cfg.max_distance > 0 {
                out.extend(neighborhood(tag.sense.synset, cfg, &self.ontology)?);
            }
        }
        Ok(out)
    }

    pub fn corpus_stats(&self) -> CorpusStats {
        corpus_stats(self)
    }
}
