//! Bounded breadth-first search over the synset graph.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{NeighborhoodConfig, OntologyError, OntologyGraph, RelationSet, Sense, SynsetId};

/// Distances from one seed synset to every synset reachable within a bound.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    seed: SynsetId,
    distances: HashMap<SynsetId, u32>,
}

impl DistanceMap {
    pub fn compute(
        graph: &OntologyGraph,
        seed: SynsetId,
        relations: RelationSet,
        max_distance: u32,
    ) -> Result<Self, OntologyError> {
        let mut distances = HashMap::new();
        bfs(graph, seed, relations, max_distance, |id, d| {
            distances.insert(id, d);
            false
        })?;
        Ok(Self { seed, distances })
    }

    pub fn seed(&self) -> SynsetId {
        self.seed
    }

    pub fn get(&self, id: SynsetId) -> Option<u32> {
        self.distances.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SynsetId, u32)> + '_ {
        self.distances.iter().map(|(&id, &d)| (id, d))
    }
}

/// Visits synsets in BFS order up to `max_distance`. The visitor returns
/// `true` to stop early.
fn bfs(
    graph: &OntologyGraph,
    seed: SynsetId,
    relations: RelationSet,
    max_distance: u32,
    mut visit: impl FnMut(SynsetId, u32) -> bool,
) -> Result<(), OntologyError> {
    let start = graph
        .position(seed)
        .ok_or(OntologyError::UnknownSynset(seed))?;
    let mut seen = vec![false; graph.len()];
    let mut queue = VecDeque::new();
    seen[start as usize] = true;
    queue.push_back((start, 0u32));
    while let Some((node, depth)) = queue.pop_front() {
        if visit(graph.id_at(node), depth) {
            return Ok(());
        }
        if depth == max_distance {
            continue;
        }
        for &(rel, next) in graph.neighbours(node) {
            if relations.allows(rel) && !seen[next as usize] {
                seen[next as usize] = true;
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(())
}

/// Shortest path length between two synsets over the configured relations,
/// or `None` when no path of length at most `cfg.max_distance` exists.
pub fn node_distance(
    a: SynsetId,
    b: SynsetId,
    cfg: &NeighborhoodConfig,
    graph: &OntologyGraph,
) -> Result<Option<u32>, OntologyError> {
    if !graph.contains(b) {
        return Err(OntologyError::UnknownSynset(b));
    }
    let mut found = None;
    bfs(graph, a, cfg.relations, cfg.max_distance, |id, d| {
        if id == b {
            found = Some(d);
            true
        } else {
            false
        }
    })?;
    Ok(found)
}

/// Senses of every synset within `cfg.max_distance` of `seed`, always
/// including all senses of the seed synset itself.
pub fn neighborhood(
    seed: SynsetId,
    cfg: &NeighborhoodConfig,
    graph: &OntologyGraph,
) -> Result<BTreeSet<Sense>, OntologyError> {
    let mut out = BTreeSet::new();
    bfs(graph, seed, cfg.relations, cfg.max_distance, |id, d| {
        if let Some(synset) = graph.synset(id) {
            let take = if d == 0 || cfg.include_synonyms {
                synset.lemmas.len()
            } else {
                1
            };
            out.extend(
                synset.lemmas[..take]
                    .iter()
                    .map(|l| Sense::new(l.clone(), id)),
            );
        }
        false
    })?;
    Ok(out)
}
