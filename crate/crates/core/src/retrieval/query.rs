use serde::Serialize;

use super::RetrievalError;
use crate::ontology::{normalize_lemma, OntologyGraph, Pos, Sense};

/// Longest multiword lexicon entry tried when matching query tokens.
const MAX_COLLOCATION: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Query {
    pub raw_text: String,
    /// Matched lemmas in query order, without repeats.
    pub collocations: Vec<String>,
    /// Every sense of every matched lemma, without repeats.
    pub senses: Vec<Sense>,
    pub unresolved_tokens: Vec<String>,
}

/// Lowercased word tokens. Letters, digits, apostrophes and inner hyphens are
/// kept; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .map(|t| t.trim_matches(|c| c == '\'' || c == '-'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn lemma_candidates(form: &str, graph: &OntologyGraph) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for pos in Pos::ALL {
        for lemma in normalize_lemma(form, pos, graph) {
            if !out.contains(&lemma) {
                out.push(lemma);
            }
        }
    }
    out
}

/// Scans tokens left to right, taking the longest run of up to four tokens
/// that normalizes to a known lemma. Matched tokens are consumed.
pub fn parse_query(raw_text: &str, graph: &OntologyGraph) -> Result<Query, RetrievalError> {
    let tokens = tokenize(raw_text);
    let mut query = Query {
        raw_text: raw_text.to_string(),
        collocations: Vec::new(),
        senses: Vec::new(),
        unresolved_tokens: Vec::new(),
    };
    let mut i = 0;
    while i < tokens.len() {
        let longest = MAX_COLLOCATION.min(tokens.len() - i);
        let matched = (1..=longest).rev().find_map(|n| {
            let lemmas = lemma_candidates(&tokens[i..i + n].join("_"), graph);
            (!lemmas.is_empty()).then_some((n, lemmas))
        });
        match matched {
            Some((n, lemmas)) => {
                for lemma in lemmas {
                    for sense in graph.lookup_senses(&lemma, None) {
                        if !query.senses.contains(&sense) {
                            query.senses.push(sense);
                        }
                    }
                    if !query.collocations.contains(&lemma) {
                        query.collocations.push(lemma);
                    }
                }
                i += n;
            }
            None => {
                query.unresolved_tokens.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    if query.senses.is_empty() {
        return Err(RetrievalError::EmptyQuery);
    }
    Ok(query)
}
