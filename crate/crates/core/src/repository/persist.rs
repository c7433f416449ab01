//! Line-delimited JSON persistence, one record object per line.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    check_weight, AnnotatedSense, EmotionTuple, ImageId, ImageRecord, Repository,
    RepositoryError, WeightRating, MIN_COMMIT_SENSES,
};
use crate::ontology::{OntologyGraph, Pos, Sense, SynsetId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRating {
    pub annotator: String,
    pub weight: f64,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTag {
    pub lemma: String,
    pub pos: Pos,
    pub offset: u32,
    pub ratings: Vec<StoredRating>,
}

/// On-disk (and on-the-wire) shape of an image record. Field order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub id: ImageId,
    pub uri: String,
    pub keyword: Option<String>,
    pub emotion: Option<EmotionTuple>,
    pub tags: Vec<StoredTag>,
    pub committed: bool,
}

impl From<&ImageRecord> for StoredRecord {
    fn from(r: &ImageRecord) -> Self {
        StoredRecord {
            id: r.id,
            uri: r.uri.clone(),
            keyword: r.keyword.clone(),
            emotion: r.emotion,
            tags: r
                .annotations
                .iter()
                .map(|a| StoredTag {
                    lemma: a.sense.lemma.clone(),
                    pos: a.sense.synset.pos,
                    offset: a.sense.synset.offset,
                    ratings: a
                        .ratings
                        .iter()
                        .map(|w| StoredRating {
                            annotator: w.annotator.clone(),
                            weight: w.weight,
                            at: w.recorded_at,
                        })
                        .collect(),
                })
                .collect(),
            committed: r.committed,
        }
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> RepositoryError {
    RepositoryError::MalformedRecord {
        line,
        reason: reason.into(),
    }
}

impl StoredRecord {
    fn into_record(self, line: usize, graph: &OntologyGraph) -> Result<ImageRecord, RepositoryError> {
        if self.uri.trim().is_empty() {
            return Err(malformed(line, "empty uri"));
        }
        if let Some(e) = &self.emotion {
            e.validate().map_err(|e| malformed(line, e.to_string()))?;
        }
        let mut seen = HashSet::new();
        let mut annotations = Vec::with_capacity(self.tags.len());
        for tag in self.tags {
            let sense = Sense::new(tag.lemma, SynsetId::new(tag.pos, tag.offset));
            graph
                .resolve_sense(&sense)
                .map_err(|_| RepositoryError::UnknownSense(sense.to_string()))?;
            if !seen.insert(sense.clone()) {
                return Err(malformed(line, format!("duplicate tag {sense}")));
            }
            if tag.ratings.is_empty() {
                return Err(malformed(line, format!("tag {sense} has no ratings")));
            }
            let mut annotators = HashSet::new();
            let mut ratings = Vec::with_capacity(tag.ratings.len());
            for r in tag.ratings {
                check_weight(r.weight).map_err(|e| malformed(line, e.to_string()))?;
                if !annotators.insert(r.annotator.clone()) {
                    return Err(malformed(line, format!("annotator {} rated {sense} twice", r.annotator)));
                }
                ratings.push(WeightRating {
                    annotator: r.annotator,
                    weight: r.weight,
                    recorded_at: r.at,
                });
            }
            annotations.push(AnnotatedSense { sense, ratings });
        }
        if self.committed && annotations.len() < MIN_COMMIT_SENSES {
            return Err(malformed(line, "committed record with fewer than 3 senses"));
        }
        Ok(ImageRecord {
            id: self.id,
            uri: self.uri,
            keyword: super::clean_keyword(self.keyword),
            emotion: self.emotion,
            annotations,
            committed: self.committed,
        })
    }
}

impl Repository {
    pub fn save<W: Write>(&self, mut out: W) -> Result<(), RepositoryError> {
        for record in self.images() {
            serde_json::to_writer(&mut out, &StoredRecord::from(record))
                .map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a repository, validating every tag against `ontology`.
    pub fn load<R: BufRead>(reader: R, ontology: Arc<OntologyGraph>) -> Result<Repository, RepositoryError> {
        let mut repo = Repository::new(ontology);
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let stored: StoredRecord =
                serde_json::from_str(&line).map_err(|e| malformed(lineno, e.to_string()))?;
            let record = stored.into_record(lineno, &repo.ontology)?;
            if repo.images.contains_key(&record.id) {
                return Err(malformed(lineno, format!("duplicate image id {}", record.id)));
            }
            repo.insert_record(record);
        }
        Ok(repo)
    }

    /// Inserts a fully formed record, as produced by [`Repository::load`].
    pub fn insert_stored(&mut self, stored: StoredRecord) -> Result<ImageId, RepositoryError> {
        let record = stored.into_record(0, &self.ontology)?;
        if self.images.contains_key(&record.id) {
            return Err(malformed(0, format!("duplicate image id {}", record.id)));
        }
        let id = record.id;
        self.insert_record(record);
        Ok(id)
    }
}
