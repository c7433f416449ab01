//! Weighted-sense image annotation and retrieval over a lexical ontology.
//!
//! Images carry tags drawn from a synset graph, each tag weighted by one or
//! more annotators, plus an optional valence/arousal/dominance tuple and a
//! legacy free-text keyword. Queries are parsed into senses and every
//! committed image is scored against them exhaustively.

pub mod ontology;
pub mod repository;
pub mod retrieval;
pub mod evaluation;
