//! Sense-pair similarity: precomputed table lookups with a path-length fallback.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use super::{
    node_distance, NeighborhoodConfig, OntologyError, OntologyGraph, Pos, RelationSet, Sense,
    MAX_DISTANCE_CAP,
};

/// Sense notation `lemma#pos#n`, where `n` is the 1-based position among the
/// lemma's senses of that part of speech in (pos, offset) order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SenseKey {
    pub lemma: String,
    pub pos: Pos,
    pub number: u32,
}

impl SenseKey {
    pub fn for_sense(graph: &OntologyGraph, sense: &Sense) -> Option<SenseKey> {
        graph.sense_number(sense).map(|number| SenseKey {
            lemma: sense.lemma.clone(),
            pos: sense.synset.pos,
            number,
        })
    }

    pub fn resolve(&self, graph: &OntologyGraph) -> Option<Sense> {
        graph.sense_by_number(&self.lemma, self.pos, self.number)
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}#{}", self.lemma, self.pos, self.number)
    }
}

impl FromStr for SenseKey {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OntologyError::UnknownSense(s.to_string());
        let mut parts = s.trim().rsplitn(3, '#');
        let number = parts.next().ok_or_else(bad)?;
        let pos = parts.next().ok_or_else(bad)?;
        let lemma = parts.next().ok_or_else(bad)?;
        let number: u32 = number.parse().map_err(|_| bad())?;
        if number == 0 || lemma.is_empty() {
            return Err(bad());
        }
        Ok(SenseKey {
            lemma: super::parse::normalize_surface(lemma),
            pos: pos.parse()?,
            number,
        })
    }
}

/// Precomputed relatedness scores keyed by unordered sense pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityTable {
    entries: HashMap<(SenseKey, SenseKey), f64>,
}

fn ordered(a: SenseKey, b: SenseKey) -> (SenseKey, SenseKey) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SimilarityTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or overwrites a pair. Scores outside [0, 1] are rejected.
    pub fn insert(&mut self, a: SenseKey, b: SenseKey, score: f64) -> Result<(), OntologyError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(OntologyError::ScoreOutOfRange {
                source_name: "<insert>".into(),
                line: 0,
                score,
            });
        }
        self.entries.insert(ordered(a, b), score);
        Ok(())
    }

    pub fn get(&self, a: &SenseKey, b: &SenseKey) -> Option<f64> {
        let key = ordered(a.clone(), b.clone());
        self.entries.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads the tab-separated `lemma#pos#n TAB lemma#pos#n TAB score` format.
    /// Later duplicates overwrite earlier ones.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, OntologyError> {
        let source = "<similarity pairs>";
        let mut table = SimilarityTable::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(OntologyError::malformed(
                    source,
                    lineno,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            let a: SenseKey = fields[0]
                .parse()
                .map_err(|_| OntologyError::malformed(source, lineno, "bad sense key"))?;
            let b: SenseKey = fields[1]
                .parse()
                .map_err(|_| OntologyError::malformed(source, lineno, "bad sense key"))?;
            let score: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| OntologyError::malformed(source, lineno, "score is not a number"))?;
            if !(0.0..=1.0).contains(&score) {
                return Err(OntologyError::ScoreOutOfRange {
                    source_name: source.into(),
                    line: lineno,
                    score,
                });
            }
            table.entries.insert(ordered(a, b), score);
        }
        Ok(table)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SenseKey, &SenseKey, f64)> {
        self.entries.iter().map(|((a, b), &s)| (a, b, s))
    }
}

/// Loads a similarity-pairs stream. See [`SimilarityTable::from_reader`].
pub fn load_similarity_pairs<R: BufRead>(reader: R) -> Result<SimilarityTable, OntologyError> {
    SimilarityTable::from_reader(reader)
}

/// Path measure `1 / (1 + d)` for a taxonomy distance, 0 when unreachable.
pub(crate) fn path_score(distance: Option<u32>) -> f64 {
    match distance {
        Some(d) => 1.0 / (1.0 + f64::from(d)),
        None => 0.0,
    }
}

/// Similarity of two senses in [0, 1].
///
/// A table entry for the unordered pair wins. Otherwise the score is
/// `1 / (1 + d)` where `d` is the hypernym/hyponym distance between the two
/// synsets, and 0 when they are further apart than `max_distance`. Senses of
/// the same synset score 1.
pub fn similarity(
    a: &Sense,
    b: &Sense,
    graph: &OntologyGraph,
    table: Option<&SimilarityTable>,
    max_distance: u32,
) -> Result<f64, OntologyError> {
    graph.resolve_sense(a)?;
    graph.resolve_sense(b)?;
    if let Some(table) = table.filter(|t| !t.is_empty()) {
        if let (Some(ka), Some(kb)) = (SenseKey::for_sense(graph, a), SenseKey::for_sense(graph, b)) {
            if let Some(score) = table.get(&ka, &kb) {
                return Ok(score);
            }
        }
    }
    let cfg = NeighborhoodConfig::new(max_distance.min(MAX_DISTANCE_CAP), RelationSet::TAXONOMY)?;
    Ok(path_score(node_distance(a.synset, b.synset, &cfg, graph)?))
}
