use super::{ImageView, MatchDetail, Query, RankedResult, RetrievalError};
use crate::ontology::{
    path_score, DistanceMap, OntologyGraph, RelationSet, SenseKey, SimilarityTable,
    MAX_DISTANCE_CAP,
};
use crate::repository::ImageRecord;

struct PreparedSense {
    key: Option<SenseKey>,
    distances: DistanceMap,
}

/// Query senses prepared for repeated scoring: one bounded BFS per query
/// sense replaces a path search per (query sense, tag) pair.
pub struct Scorer<'a> {
    query: &'a Query,
    graph: &'a OntologyGraph,
    table: Option<&'a SimilarityTable>,
    prepared: Vec<PreparedSense>,
}

impl<'a> Scorer<'a> {
    pub fn new(
        query: &'a Query,
        graph: &'a OntologyGraph,
        table: Option<&'a SimilarityTable>,
        max_distance: u32,
    ) -> Result<Self, RetrievalError> {
        let table = table.filter(|t| !t.is_empty());
        let max_distance = max_distance.min(MAX_DISTANCE_CAP);
        let prepared = query
            .senses
            .iter()
            .map(|s| {
                graph.resolve_sense(s)?;
                Ok(PreparedSense {
                    key: table.and_then(|_| SenseKey::for_sense(graph, s)),
                    distances: DistanceMap::compute(
                        graph,
                        s.synset,
                        RelationSet::TAXONOMY,
                        max_distance,
                    )?,
                })
            })
            .collect::<Result<Vec<_>, RetrievalError>>()?;
        Ok(Self {
            query,
            graph,
            table,
            prepared,
        })
    }

    pub fn score(&self, view: &ImageView) -> RankedResult {
        let tag_keys: Vec<Option<SenseKey>> = match self.table {
            Some(_) => view
                .tags
                .iter()
                .map(|(s, _)| SenseKey::for_sense(self.graph, s))
                .collect(),
            None => vec![None; view.tags.len()],
        };
        let mut raw_score = 0.0;
        let mut matches = Vec::new();
        for (qs, prepared) in self.query.senses.iter().zip(&self.prepared) {
            for ((tag, weight), tag_key) in view.tags.iter().zip(&tag_keys) {
                let from_table = match (self.table, &prepared.key, tag_key) {
                    (Some(table), Some(a), Some(b)) => table.get(a, b),
                    _ => None,
                };
                let sim = from_table
                    .unwrap_or_else(|| path_score(prepared.distances.get(tag.synset)));
                let contribution = weight * sim;
                raw_score += contribution;
                if sim > 0.0 {
                    matches.push(MatchDetail {
                        query_sense: qs.clone(),
                        image_sense: tag.clone(),
                        mean_weight: *weight,
                        similarity: sim,
                        contribution,
                    });
                }
            }
        }
        let denominator = self.query.senses.len() as f64 * view.weight_mass();
        let relevance = if denominator > 0.0 {
            (raw_score / denominator).min(1.0)
        } else {
            0.0
        };
        RankedResult {
            image_id: view.id,
            raw_score,
            relevance,
            matches,
        }
    }
}

pub fn score_view(
    query: &Query,
    view: &ImageView,
    graph: &OntologyGraph,
    table: Option<&SimilarityTable>,
    max_distance: u32,
) -> Result<RankedResult, RetrievalError> {
    Ok(Scorer::new(query, graph, table, max_distance)?.score(view))
}

/// Scores one committed image against a parsed query.
pub fn score_image(
    query: &Query,
    image: &ImageRecord,
    graph: &OntologyGraph,
    table: Option<&SimilarityTable>,
    max_distance: u32,
) -> Result<RankedResult, RetrievalError> {
    score_view(query, &ImageView::from_record(image)?, graph, table, max_distance)
}
