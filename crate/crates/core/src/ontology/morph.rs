//! Rule-based lemma normalization with exception lists.

use super::parse::normalize_surface;
use super::{OntologyGraph, Pos};

const NOUN_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ses", "s"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("ies", "y"),
];

// -es, -ed and -ing try the e-restored form before the bare stem.
const VERB_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ies", "y"),
    ("es", "e"),
    ("es", ""),
    ("ed", "e"),
    ("ed", ""),
    ("ing", "e"),
    ("ing", ""),
];

fn rules(pos: Pos) -> &'static [(&'static str, &'static str)] {
    match pos {
        Pos::Noun => NOUN_RULES,
        Pos::Verb => VERB_RULES,
        Pos::Adj | Pos::Adv => &[],
    }
}

/// Candidate base lemmas for a surface form, all present in the lemma index
/// under `pos`. Returns the form itself when it is already a lemma, otherwise
/// exception-list matches, otherwise suffix-rule candidates. Empty on no match.
pub fn normalize_lemma(surface: &str, pos: Pos, graph: &OntologyGraph) -> Vec<String> {
    let form = normalize_surface(surface);
    if form.is_empty() {
        return Vec::new();
    }
    if graph.has_lemma_with_pos(&form, pos) {
        return vec![form];
    }

    let mut out: Vec<String> = Vec::new();
    for base in graph.exception_bases(pos, &form) {
        if graph.has_lemma_with_pos(base, pos) && !out.contains(base) {
            out.push(base.clone());
        }
    }
    if !out.is_empty() {
        return out;
    }

    for (suffix, replacement) in rules(pos) {
        if let Some(stem) = form.strip_suffix(suffix) {
            if stem.is_empty() {
                continue;
            }
            let candidate = format!("{stem}{replacement}");
            if graph.has_lemma_with_pos(&candidate, pos) && !out.contains(&candidate) {
                out.push(candidate);
            }
        }
    }
    out
}
