//! Seeded synthetic corpora with planted queries.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{EvaluationError, JudgedQuery};
use crate::ontology::{
    parse_simple_graph, DistanceMap, OntologyGraph, RelationSet, Sense, MAX_DISTANCE_CAP,
};
use crate::repository::{EmotionTuple, ImageId, Repository, MIN_COMMIT_SENSES};
use crate::retrieval::{parse_query, DEFAULT_MAX_DISTANCE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TagCountDistribution {
    Constant(usize),
    /// Normal samples rounded to integers, redrawn until inside `[min, max]`.
    TruncatedNormal { mean: f64, sd: f64, min: usize, max: usize },
}

impl TagCountDistribution {
    /// Tag counts of the reference annotation set: median about 20,
    /// observed range 13 to 28.
    pub const REFERENCE: TagCountDistribution = TagCountDistribution::TruncatedNormal {
        mean: 20.56,
        sd: 2.77,
        min: 13,
        max: 28,
    };

    fn bounds(&self) -> (usize, usize) {
        match *self {
            TagCountDistribution::Constant(n) => (n, n),
            TagCountDistribution::TruncatedNormal { min, max, .. } => (min, max),
        }
    }

    fn sample<R: Rng>(&self, normal: Option<&Normal<f64>>, rng: &mut R) -> usize {
        match *self {
            TagCountDistribution::Constant(n) => n,
            TagCountDistribution::TruncatedNormal { min, max, .. } => {
                let normal = normal.expect("validated");
                loop {
                    let x = normal.sample(rng).round();
                    if x >= min as f64 && x <= max as f64 {
                        return x as usize;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub image_count: usize,
    pub tag_count: TagCountDistribution,
    /// Synsets in the generated graph; ignored when an ontology is supplied.
    pub graph_size: usize,
    pub seed: u64,
    pub query_count: usize,
    /// An image is relevant to a query when one of its tags lies within this
    /// taxonomy distance of a query sense.
    pub relevance_distance: u32,
    pub annotators: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            image_count: 100,
            tag_count: TagCountDistribution::REFERENCE,
            graph_size: 2000,
            seed: 0,
            query_count: 40,
            relevance_distance: DEFAULT_MAX_DISTANCE,
            annotators: 2,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self, synsets: usize) -> Result<Option<Normal<f64>>, EvaluationError> {
        let bad = |m: String| Err(EvaluationError::InvalidSpec(m));
        if synsets == 0 {
            return bad("graph size must be positive".into());
        }
        if self.annotators == 0 {
            return bad("at least one annotator is required".into());
        }
        if self.relevance_distance > MAX_DISTANCE_CAP {
            return bad(format!("relevance distance above {MAX_DISTANCE_CAP}"));
        }
        let (min, max) = self.tag_count.bounds();
        if min < MIN_COMMIT_SENSES || min > max {
            return bad(format!("tag counts {min}..{max} must satisfy {MIN_COMMIT_SENSES} <= min <= max"));
        }
        if max > synsets {
            return bad(format!("{max} tags per image exceed {synsets} synsets"));
        }
        match self.tag_count {
            TagCountDistribution::Constant(_) => Ok(None),
            TagCountDistribution::TruncatedNormal { mean, sd, .. } => {
                if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
                    return bad(format!("bad normal parameters {mean}, {sd}"));
                }
                Ok(Some(Normal::new(mean, sd).expect("checked")))
            }
        }
    }
}

/// Letter-only lemma for synset number `i`.
pub fn synthetic_lemma(i: usize) -> String {
    let mut s = String::from("q");
    let mut n = i;
    loop {
        s.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    s
}

/// A random recursive taxonomy over `size` noun synsets: each synset after
/// the first takes a hypernym among the earlier ones. About one in twenty
/// also gets a holonym.
pub fn synthetic_graph(size: usize, seed: u64) -> OntologyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for i in 0..size {
        let mut rels = Vec::new();
        if i > 0 {
            rels.push(format!("hypernym:n{}", rng.random_range(0..i) + 1));
            if i > 1 && rng.random_bool(0.05) {
                rels.push(format!("holonym:n{}", rng.random_range(0..i) + 1));
            }
        }
        writeln!(text, "n{}\t{}\tsynthetic concept {i}\t{}", i + 1, synthetic_lemma(i), rels.join(";"))
            .expect("string write");
    }
    parse_simple_graph(text.as_bytes()).expect("generated graph is well formed")
}

/// Builds a committed corpus and planted queries. Each query names the lemma
/// of a random tag; its judged images are those with a tag within
/// `relevance_distance` of any sense the query parses to.
pub fn generate_synthetic_corpus(
    spec: &SyntheticSpec,
    ontology: Option<Arc<OntologyGraph>>,
) -> Result<(Repository, Vec<JudgedQuery>), EvaluationError> {
    if ontology.is_none() && spec.graph_size == 0 {
        spec.validate(0)?;
    }
    let graph = match ontology {
        Some(g) => g,
        None => Arc::new(synthetic_graph(spec.graph_size, spec.seed)),
    };
    let normal = spec.validate(graph.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1));
    let synsets: Vec<_> = graph.synsets().collect();
    let base_time = Utc.with_ymd_and_hms(2012, 1, 1, 0, 0, 0).unwrap();
    let mut repo = Repository::new(graph.clone());
    for i in 0..spec.image_count {
        let count = spec.tag_count.sample(normal.as_ref(), &mut rng);
        let emotion = EmotionTuple::new(
            rng.random_range(100..=900) as f64 / 100.0,
            rng.random_range(100..=900) as f64 / 100.0,
            rng.random_range(100..=900) as f64 / 100.0,
        )?;
        let id = repo.add_image(&format!("synthetic://{i}"), None, Some(emotion))?.id;
        let picks = rand::seq::index::sample(&mut rng, synsets.len(), count);
        for (t, pick) in picks.into_iter().enumerate() {
            let synset = synsets[pick];
            let lemma = synset.lemmas.choose(&mut rng).expect("synsets have lemmas");
            let sense = Sense::new(lemma.clone(), synset.id);
            for a in 0..spec.annotators {
                let weight = rng.random_range(1..=20) as f64 / 20.0;
                let at = base_time + chrono::Duration::seconds((i * 1000 + t * 10 + a) as i64);
                repo.annotate_at(id, sense.clone(), weight, &format!("annotator{}", a + 1), at)?;
            }
        }
        repo.commit(id)?;
    }
    let queries = plant_queries(spec, &repo, &mut rng);
    Ok((repo, queries))
}

fn plant_queries(spec: &SyntheticSpec, repo: &Repository, rng: &mut ChaCha8Rng) -> Vec<JudgedQuery> {
    let graph = repo.ontology();
    let ids: Vec<ImageId> = repo.images().map(|r| r.id).collect();
    if ids.is_empty() {
        return Vec::new();
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < spec.query_count && attempts < spec.query_count * 20 {
        attempts += 1;
        let image = repo.image(*ids.choose(rng).expect("non-empty")).expect("listed");
        let tag = &image.annotations.choose(rng).expect("committed").sense;
        let text = tag.lemma.replace('_', " ");
        if !seen.insert(text.clone()) {
            continue;
        }
        let Ok(query) = parse_query(&text, graph) else { continue };
        let mut near = HashSet::new();
        for s in &query.senses {
            let map = DistanceMap::compute(graph, s.synset, RelationSet::TAXONOMY, spec.relevance_distance)
                .expect("query senses resolve");
            near.extend(map.iter().map(|(id, _)| id));
        }
        let relevant: BTreeSet<ImageId> = repo
            .committed_images()
            .filter(|r| r.annotations.iter().any(|a| near.contains(&a.sense.synset)))
            .map(|r| r.id)
            .collect();
        out.push(JudgedQuery::new(text, relevant).expect("the source image is relevant"));
    }
    out
}
