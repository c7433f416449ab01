//! Lexical-ontology graph: synsets, senses, and the relations between them.
//!
//! A graph is built once (from Princeton WordNet database files or from the
//! tab-separated fixture format) and is immutable afterwards, so it can be
//! shared freely between threads behind an `Arc`.

mod distance;
mod error;
mod morph;
mod parse;
mod similarity;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use distance::{neighborhood, node_distance, DistanceMap};
pub use error::OntologyError;
pub use morph::normalize_lemma;
pub use parse::{normalize_surface, parse_simple_graph, write_simple_graph, OntologyBuilder};
pub use similarity::{load_similarity_pairs, similarity, SenseKey, SimilarityTable};
pub(crate) use similarity::path_score;

/// Hard upper bound on any configured node distance.
pub const MAX_DISTANCE_CAP: u32 = 30;

/// Part of speech. The derived ordering (noun, verb, adjective, adverb) is the
/// ordering used for deterministic sense lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "n")]
    Noun,
    #[serde(rename = "v")]
    Verb,
    #[serde(rename = "a")]
    Adj,
    #[serde(rename = "r")]
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    pub fn letter(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adj => 'a',
            Pos::Adv => 'r',
        }
    }

    /// Accepts the WordNet ss_type letters; adjective satellites (`s`) fold into `Adj`.
    pub fn from_letter(c: char) -> Option<Pos> {
        match c {
            'n' => Some(Pos::Noun),
            'v' => Some(Pos::Verb),
            'a' | 's' => Some(Pos::Adj),
            'r' => Some(Pos::Adv),
            _ => None,
        }
    }

    /// Suffix used by the WordNet database file names (`data.noun`, ...).
    pub fn file_suffix(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Pos {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Pos::from_letter(c),
            _ => match s {
                "noun" => Some(Pos::Noun),
                "verb" => Some(Pos::Verb),
                "adj" => Some(Pos::Adj),
                "adv" => Some(Pos::Adv),
                _ => None,
            },
        }
        .ok_or_else(|| OntologyError::InvalidPos(s.to_string()))
    }
}

/// Identifies a synset by part of speech and database offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SynsetId {
    pub pos: Pos,
    pub offset: u32,
}

impl SynsetId {
    pub fn new(pos: Pos, offset: u32) -> Self {
        Self { pos, offset }
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.pos.letter(), self.offset)
    }
}

impl FromStr for SynsetId {
    type Err = OntologyError;

    /// Parses the compact `<pos-letter><offset>` form, e.g. `n2084071`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OntologyError::InvalidSynsetId(s.to_string());
        let mut chars = s.chars();
        let pos = chars.next().and_then(Pos::from_letter).ok_or_else(bad)?;
        let offset = chars.as_str().parse::<u32>().map_err(|_| bad())?;
        Ok(SynsetId { pos, offset })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationType {
    Hypernym,
    Hyponym,
    Holonym,
    Meronym,
}

impl RelationType {
    pub const ALL: [RelationType; 4] = [
        RelationType::Hypernym,
        RelationType::Hyponym,
        RelationType::Holonym,
        RelationType::Meronym,
    ];

    pub fn inverse(self) -> RelationType {
        match self {
            RelationType::Hypernym => RelationType::Hyponym,
            RelationType::Hyponym => RelationType::Hypernym,
            RelationType::Holonym => RelationType::Meronym,
            RelationType::Meronym => RelationType::Holonym,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationType::Hypernym => "hypernym",
            RelationType::Hyponym => "hyponym",
            RelationType::Holonym => "holonym",
            RelationType::Meronym => "meronym",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationType> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(name))
    }

    /// Maps a WordNet pointer symbol onto a supported relation. Other pointer
    /// kinds (antonymy, attributes, derivations, ...) yield `None`.
    pub fn from_pointer_symbol(symbol: &str) -> Option<RelationType> {
        match symbol {
            "@" | "@i" => Some(RelationType::Hypernym),
            "~" | "~i" => Some(RelationType::Hyponym),
            "#m" | "#s" | "#p" => Some(RelationType::Holonym),
            "%m" | "%s" | "%p" => Some(RelationType::Meronym),
            _ => None,
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A set of relation types. Each inverse pair forms one undirected edge, so a
/// set containing either member of a pair permits traversal in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RelationSet(u8);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    pub const TAXONOMY: RelationSet = RelationSet(0b0011);
    pub const PARTONOMY: RelationSet = RelationSet(0b1100);
    pub const ALL: RelationSet = RelationSet(0b1111);

    pub fn contains(self, rel: RelationType) -> bool {
        self.0 & rel.bit() != 0
    }

    pub fn with(self, rel: RelationType) -> RelationSet {
        RelationSet(self.0 | rel.bit())
    }

    /// Whether an edge stored with type `rel` may be traversed.
    pub fn allows(self, rel: RelationType) -> bool {
        self.contains(rel) || self.contains(rel.inverse())
    }

    pub fn iter(self) -> impl Iterator<Item = RelationType> {
        RelationType::ALL.into_iter().filter(move |r| self.contains(*r))
    }
}

impl FromIterator<RelationType> for RelationSet {
    fn from_iter<I: IntoIterator<Item = RelationType>>(iter: I) -> Self {
        iter.into_iter().fold(RelationSet::EMPTY, RelationSet::with)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub relations: Vec<(RelationType, SynsetId)>,
}

/// One meaning of one word: a lemma paired with a synset containing it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sense {
    pub lemma: String,
    pub synset: SynsetId,
}

impl Sense {
    pub fn new(lemma: impl Into<String>, synset: SynsetId) -> Self {
        Self {
            lemma: lemma.into(),
            synset,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.lemma, self.synset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodConfig {
    pub max_distance: u32,
    pub relations: RelationSet,
    /// When false, reached neighbour synsets contribute only their head lemma.
    /// The seed synset always contributes all of its lemmas.
    pub include_synonyms: bool,
}

impl NeighborhoodConfig {
    pub fn new(max_distance: u32, relations: RelationSet) -> Result<Self, OntologyError> {
        if max_distance > MAX_DISTANCE_CAP {
            return Err(OntologyError::DistanceTooLarge(max_distance));
        }
        Ok(Self {
            max_distance,
            relations,
            include_synonyms: true,
        })
    }

    /// All four relations, synonyms included.
    pub fn with_distance(max_distance: u32) -> Result<Self, OntologyError> {
        Self::new(max_distance, RelationSet::ALL)
    }

    pub fn taxonomy(max_distance: u32) -> Result<Self, OntologyError> {
        Self::new(max_distance, RelationSet::TAXONOMY)
    }
}

/// Summary counts printed after an import.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GraphSummary {
    pub synsets: usize,
    pub senses: usize,
    pub lemmas: usize,
    /// Undirected hypernym/hyponym edges.
    pub taxonomy_edges: usize,
    /// Undirected holonym/meronym edges.
    pub partonomy_edges: usize,
}

/// Immutable synset graph with a lemma index and morphological exceptions.
#[derive(Debug, Clone, Default)]
pub struct OntologyGraph {
    synsets: Vec<Synset>,
    positions: HashMap<SynsetId, u32>,
    adjacency: Vec<Vec<(RelationType, u32)>>,
    lemma_index: HashMap<String, Vec<SynsetId>>,
    exceptions: HashMap<Pos, HashMap<String, Vec<String>>>,
}

impl OntologyGraph {
    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.positions.get(&id).map(|&i| &self.synsets[i as usize])
    }

    pub fn contains(&self, id: SynsetId) -> bool {
        self.positions.contains_key(&id)
    }

    /// Synsets in ascending (pos, offset) order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.iter()
    }

    pub fn lemma_synsets(&self, lemma: &str) -> &[SynsetId] {
        self.lemma_index.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_lemma(&self, lemma: &str) -> bool {
        self.lemma_index.contains_key(lemma)
    }

    pub fn has_lemma_with_pos(&self, lemma: &str, pos: Pos) -> bool {
        self.lemma_synsets(lemma).iter().any(|id| id.pos == pos)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemma_index.keys().map(String::as_str)
    }

    pub fn exception_bases(&self, pos: Pos, form: &str) -> &[String] {
        self.exceptions
            .get(&pos)
            .and_then(|m| m.get(form))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// One sense per synset containing `lemma`, ordered by (pos, offset).
    pub fn lookup_senses(&self, lemma: &str, pos: Option<Pos>) -> Vec<Sense> {
        self.lemma_synsets(lemma)
            .iter()
            .filter(|id| pos.is_none_or(|p| id.pos == p))
            .map(|&id| Sense::new(lemma, id))
            .collect()
    }

    /// All senses of a synset, one per lemma.
    pub fn synset_senses(&self, id: SynsetId) -> Vec<Sense> {
        self.synset(id)
            .map(|s| s.lemmas.iter().map(|l| Sense::new(l.clone(), id)).collect())
            .unwrap_or_default()
    }

    /// Checks that the sense names a loaded synset that lists its lemma.
    pub fn resolve_sense(&self, sense: &Sense) -> Result<&Synset, OntologyError> {
        let synset = self
            .synset(sense.synset)
            .ok_or(OntologyError::UnknownSynset(sense.synset))?;
        if synset.lemmas.contains(&sense.lemma) {
            Ok(synset)
        } else {
            Err(OntologyError::UnknownSense(sense.to_string()))
        }
    }

    /// 1-based position of the sense among `lookup_senses(lemma, Some(pos))`.
    pub fn sense_number(&self, sense: &Sense) -> Option<u32> {
        self.lemma_synsets(&sense.lemma)
            .iter()
            .filter(|id| id.pos == sense.synset.pos)
            .position(|id| *id == sense.synset)
            .map(|i| i as u32 + 1)
    }

    /// Inverse of [`sense_number`](Self::sense_number).
    pub fn sense_by_number(&self, lemma: &str, pos: Pos, number: u32) -> Option<Sense> {
        if number == 0 {
            return None;
        }
        self.lemma_synsets(lemma)
            .iter()
            .filter(|id| id.pos == pos)
            .nth(number as usize - 1)
            .map(|&id| Sense::new(lemma, id))
    }

    pub fn summary(&self) -> GraphSummary {
        let mut summary = GraphSummary {
            synsets: self.synsets.len(),
            lemmas: self.lemma_index.len(),
            ..GraphSummary::default()
        };
        for synset in &self.synsets {
            summary.senses += synset.lemmas.len();
            for (rel, _) in &synset.relations {
                match rel {
                    RelationType::Hypernym => summary.taxonomy_edges += 1,
                    RelationType::Holonym => summary.partonomy_edges += 1,
                    _ => {}
                }
            }
        }
        summary
    }

    pub(crate) fn position(&self, id: SynsetId) -> Option<u32> {
        self.positions.get(&id).copied()
    }

    pub(crate) fn id_at(&self, position: u32) -> SynsetId {
        self.synsets[position as usize].id
    }

    pub(crate) fn neighbours(&self, position: u32) -> &[(RelationType, u32)] {
        &self.adjacency[position as usize]
    }
}
