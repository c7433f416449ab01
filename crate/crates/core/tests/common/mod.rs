//! Shared fixtures and independent oracles for integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wntags::ontology::{parse_simple_graph, OntologyGraph, Pos, Sense, SynsetId};

pub const RELATIONS: [&str; 4] = ["hypernym", "hyponym", "holonym", "meronym"];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// A random SimpleGraph together with the raw edge list it was written from.
pub struct RandomGraph {
    pub text: String,
    pub n: usize,
    /// `(from, to, relation index into RELATIONS)`, zero-based node numbers.
    pub edges: Vec<(usize, usize, usize)>,
    /// Lemmas per node, head first.
    pub lemmas: Vec<Vec<String>>,
}

impl RandomGraph {
    pub fn graph(&self) -> OntologyGraph {
        parse_simple_graph(self.text.as_bytes()).expect("random graph parses")
    }

    pub fn id(i: usize) -> SynsetId {
        SynsetId::new(Pos::Noun, i as u32 + 1)
    }

    /// All-pairs shortest paths by Floyd-Warshall over edges whose relation
    /// passes `allowed`, treating every edge as undirected.
    pub fn floyd(&self, allowed: impl Fn(&str) -> bool) -> Vec<Vec<Option<u32>>> {
        let n = self.n;
        let mut d = vec![vec![None; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        for &(a, b, r) in &self.edges {
            if a != b && allowed(RELATIONS[r]) {
                d[a][b] = Some(1);
                d[b][a] = Some(1);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| x + y < c) {
                            d[i][j] = Some(x + y);
                        }
                    }
                }
            }
        }
        d
    }
}

/// `n` noun synsets named `w{i}`, some with a synonym and some sharing a
/// polysemous lemma, joined by random typed edges.
pub fn random_graph(seed: u64, n: usize, edge_factor: f64) -> RandomGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lemmas = Vec::with_capacity(n);
    for i in 0..n {
        let mut l = vec![format!("w{i}")];
        if rng.random_bool(0.3) {
            l.push(format!("syn{i}"));
        }
        if rng.random_bool(0.2) {
            l.push(format!("poly{}", i % 3));
        }
        lemmas.push(l);
    }
    let edge_count = (n as f64 * edge_factor).round() as usize;
    let mut edges = Vec::new();
    if n > 1 {
        for _ in 0..edge_count {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((a, b, rng.random_range(0..4)));
            }
        }
    }
    let mut text = String::new();
    for (i, l) in lemmas.iter().enumerate() {
        let rels: Vec<String> = edges
            .iter()
            .filter(|e| e.0 == i)
            .map(|&(_, b, r)| format!("{}:n{}", RELATIONS[r], b + 1))
            .collect();
        writeln!(text, "n{}\t{}\tnode {i}\t{}", i + 1, l.join(","), rels.join(";")).unwrap();
    }
    RandomGraph { text, n, edges, lemmas }
}

/// The toy taxonomy used by scoring oracles: a small tree with a few
/// partonomy edges and polysemous lemmas.
pub fn toy_graph_text() -> &'static str {
    "n1\tentity\troot\t\n\
     n2\tanimal\tliving\thypernym:n1\n\
     n3\tdog,hound\tpet\thypernym:n2\n\
     n4\tpuppy\tyoung dog\thypernym:n3\n\
     n5\tcat\tfeline\thypernym:n2\n\
     n6\tkitten\tyoung cat\thypernym:n5\n\
     n7\tartifact\tmade\thypernym:n1\n\
     n8\tvehicle\tconveyance\thypernym:n7\n\
     n9\tcar,auto\tmotor vehicle\thypernym:n8\n\
     n10\twheel\tround part\tholonym:n9;hypernym:n7\n\
     n11\tbicycle,bike\ttwo wheels\thypernym:n8\n\
     n12\tplant\tflora\thypernym:n1\n\
     n13\ttree\twoody plant\thypernym:n12\n\
     n14\tflower\tbloom\thypernym:n12\n\
     n15\trose\tshrub\thypernym:n14\n\
     n16\tdog\tdisliked man\thypernym:n1\n\
     n17\tlandscape\tscenery\t\n\
     n18\tsky\tatmosphere\thypernym:n17\n\
     n19\tcloud\tvapor\thypernym:n18\n\
     n20\tsea,ocean\twater\thypernym:n17\n\
     n21\twave\tridge of water\thypernym:n20\n\
     n22\tbeach\tshore\thypernym:n17\n\
     n23\tsand\tgrains\tholonym:n22;hypernym:n12\n\
     n24\tperson,individual\thuman\thypernym:n2\n\
     n25\tchild,kid\tyoung person\thypernym:n24\n\
     n26\twoman\tadult female\thypernym:n24\n\
     n27\tman\tadult male\thypernym:n24\n\
     n28\tkid\tyoung goat\thypernym:n2\n\
     v29\trun\tmove fast\t\n\
     v30\tdog\tfollow\thypernym:v29\n"
}

/// Exact brute-force score: double loop over (query sense, tag), similarity
/// by the table when present, else `1/(1+d)` from a Floyd-Warshall taxonomy
/// distance capped at `max_d`.
pub struct ScoreOracle {
    index: HashMap<SynsetId, usize>,
    dist: Vec<Vec<Option<u32>>>,
}

impl ScoreOracle {
    pub fn from_simple_graph(text: &str) -> Self {
        let mut index = HashMap::new();
        let mut edges = Vec::new();
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).collect();
        for (i, line) in lines.iter().enumerate() {
            let id: SynsetId = line.split('\t').next().unwrap().trim().parse().unwrap();
            index.insert(id, i);
        }
        for (i, line) in lines.iter().enumerate() {
            let rels = line.split('\t').nth(3).unwrap_or("").trim();
            for rel in rels.split(';').filter(|r| !r.is_empty()) {
                let (name, target) = rel.split_once(':').unwrap();
                if name == "hypernym" || name == "hyponym" {
                    let t: SynsetId = target.parse().unwrap();
                    edges.push((i, index[&t]));
                }
            }
        }
        let n = lines.len();
        let mut dist = vec![vec![None; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = Some(0u32);
        }
        for &(a, b) in &edges {
            if a != b {
                dist[a][b] = Some(1);
                dist[b][a] = Some(1);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(x), Some(y)) = (dist[i][k], dist[k][j]) {
                        if dist[i][j].is_none_or(|c| x + y < c) {
                            dist[i][j] = Some(x + y);
                        }
                    }
                }
            }
        }
        Self { index, dist }
    }

    pub fn sim(&self, a: &Sense, b: &Sense, max_d: u32, table: &HashMap<(Sense, Sense), f64>) -> f64 {
        if let Some(v) = table.get(&(a.clone(), b.clone())).or_else(|| table.get(&(b.clone(), a.clone()))) {
            return *v;
        }
        match self.dist[self.index[&a.synset]][self.index[&b.synset]] {
            Some(d) if d <= max_d => 1.0 / (1.0 + d as f64),
            _ => 0.0,
        }
    }

    /// `(raw, relevance)` with the same summation order as the definition.
    pub fn score(
        &self,
        query: &[Sense],
        tags: &[(Sense, f64)],
        max_d: u32,
        table: &HashMap<(Sense, Sense), f64>,
    ) -> (f64, f64) {
        let mut raw = 0.0;
        for q in query {
            for (t, w) in tags {
                raw += w * self.sim(q, t, max_d, table);
            }
        }
        let mass: f64 = tags.iter().map(|(_, w)| w).sum();
        let denom = query.len() as f64 * mass;
        (raw, if denom > 0.0 { raw / denom } else { 0.0 })
    }
}

pub fn sense_set(senses: impl IntoIterator<Item = Sense>) -> BTreeSet<Sense> {
    senses.into_iter().collect()
}
