//! Python bindings: ontology lookup, repository editing, search and
//! benchmarks. Senses use the `lemma#pos#n` notation throughout.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wntags::evaluation::{
    generate_synthetic_corpus, parse_judged_queries, run_benchmark, EvaluationError, SyntheticSpec,
};
use wntags::ontology::{node_distance, similarity, NeighborhoodConfig, OntologyError, OntologyGraph, Sense, SenseKey};
use wntags::repository::{EmotionTuple, ImageId, Repository, RepositoryError};
use wntags::retrieval::{search, RetrievalError, SearchOptions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ontology_err(e: OntologyError) -> PyErr {
    match e {
        OntologyError::Io(_) | OntologyError::MissingFile(_) => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn repo_err(e: RepositoryError) -> PyErr {
    match e {
        RepositoryError::Io(_) => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn eval_err(e: EvaluationError) -> PyErr {
    match e {
        EvaluationError::Io(_) => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn retrieval_err(e: RetrievalError) -> PyErr {
    value_err(e)
}

fn open(path: &PathBuf) -> PyResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))
}

fn resolve(graph: &OntologyGraph, key: &str) -> PyResult<Sense> {
    let parsed: SenseKey = key.parse().map_err(ontology_err)?;
    parsed
        .resolve(graph)
        .ok_or_else(|| value_err(format!("unknown sense {key}")))
}

fn key_of(graph: &OntologyGraph, sense: &Sense) -> String {
    SenseKey::for_sense(graph, sense)
        .map(|k| k.to_string())
        .unwrap_or_else(|| sense.to_string())
}

#[pyclass(name = "Ontology", module = "wntags", frozen)]
struct PyOntology {
    inner: Arc<OntologyGraph>,
}

#[pymethods]
impl PyOntology {
    #[staticmethod]
    fn from_wordnet_dir(path: PathBuf) -> PyResult<Self> {
        let inner = OntologyGraph::load_wordnet_dir(path).map_err(ontology_err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn from_simple_graph(path: PathBuf) -> PyResult<Self> {
        let inner = OntologyGraph::load_simple_graph_file(path).map_err(ontology_err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.summary();
        let d = PyDict::new(py);
        d.set_item("synsets", s.synsets)?;
        d.set_item("senses", s.senses)?;
        d.set_item("lemmas", s.lemmas)?;
        d.set_item("taxonomy_edges", s.taxonomy_edges)?;
        d.set_item("partonomy_edges", s.partonomy_edges)?;
        Ok(d)
    }

    /// Senses of an exact lemma as dicts with `key`, `offset` and `gloss`.
    #[pyo3(signature = (lemma, pos=None))]
    fn senses<'py>(&self, py: Python<'py>, lemma: &str, pos: Option<&str>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let pos = pos.map(str::parse).transpose().map_err(ontology_err)?;
        let lemma = wntags::ontology::normalize_surface(lemma);
        let mut out = Vec::new();
        for sense in self.inner.lookup_senses(&lemma, pos) {
            let synset = self.inner.synset(sense.synset).expect("indexed");
            let d = PyDict::new(py);
            d.set_item("key", key_of(&self.inner, &sense))?;
            d.set_item("lemma", &sense.lemma)?;
            d.set_item("pos", sense.synset.pos.to_string())?;
            d.set_item("offset", sense.synset.offset)?;
            d.set_item("gloss", &synset.gloss)?;
            d.set_item("synonyms", synset.lemmas.clone())?;
            out.push(d);
        }
        Ok(out)
    }

    /// Taxonomy node distance, or None beyond `max_distance`.
    #[pyo3(signature = (a, b, max_distance=30))]
    fn distance(&self, a: &str, b: &str, max_distance: u32) -> PyResult<Option<u32>> {
        let (a, b) = (resolve(&self.inner, a)?, resolve(&self.inner, b)?);
        let cfg = NeighborhoodConfig::taxonomy(max_distance).map_err(ontology_err)?;
        node_distance(a.synset, b.synset, &cfg, &self.inner).map_err(ontology_err)
    }

    #[pyo3(signature = (a, b, max_distance=10))]
    fn similarity(&self, a: &str, b: &str, max_distance: u32) -> PyResult<f64> {
        let (a, b) = (resolve(&self.inner, a)?, resolve(&self.inner, b)?);
        similarity(&a, &b, &self.inner, None, max_distance).map_err(ontology_err)
    }
}

#[pyclass(name = "Repository", module = "wntags")]
struct PyRepository {
    inner: Repository,
}

#[pymethods]
impl PyRepository {
    #[new]
    fn new(ontology: &PyOntology) -> Self {
        Self {
            inner: Repository::new(ontology.inner.clone()),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf, ontology: &PyOntology) -> PyResult<Self> {
        let inner = Repository::load(open(&path)?, ontology.inner.clone()).map_err(repo_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        self.inner.save(BufWriter::new(file)).map_err(repo_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Returns the new image id. `emotion` is `(valence, arousal, dominance)`.
    #[pyo3(signature = (uri, keyword=None, emotion=None))]
    fn add_image(&mut self, uri: &str, keyword: Option<String>, emotion: Option<(f64, f64, f64)>) -> PyResult<u64> {
        let emotion = emotion
            .map(|(v, a, d)| EmotionTuple::new(v, a, d))
            .transpose()
            .map_err(repo_err)?;
        let record = self.inner.add_image(uri, keyword, emotion).map_err(repo_err)?;
        Ok(record.id.0)
    }

    /// Records a rating and returns the tag's new mean weight.
    fn annotate(&mut self, image: u64, sense: &str, weight: f64, annotator: &str) -> PyResult<f64> {
        let sense = resolve(self.inner.ontology(), sense)?;
        let record = self
            .inner
            .annotate(ImageId(image), sense.clone(), weight, annotator)
            .map_err(repo_err)?;
        Ok(record.annotation(&sense).expect("just annotated").mean_weight())
    }

    fn commit(&mut self, image: u64) -> PyResult<()> {
        self.inner.commit(ImageId(image)).map(|_| ()).map_err(repo_err)
    }

    /// Ranked `(image_id, relevance, raw_score)` tuples.
    #[pyo3(signature = (query, max_distance=10, min_relevance=0.0, limit=None))]
    fn search(
        &self,
        py: Python<'_>,
        query: &str,
        max_distance: u32,
        min_relevance: f64,
        limit: Option<usize>,
    ) -> PyResult<Vec<(u64, f64, f64)>> {
        let options = SearchOptions {
            max_distance,
            min_relevance,
            limit,
            ..Default::default()
        };
        let repo = &self.inner;
        let results = py
            .detach(|| search(query, repo, None, &options))
            .map_err(retrieval_err)?;
        Ok(results
            .into_iter()
            .map(|r| (r.image_id.0, r.relevance, r.raw_score))
            .collect())
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.corpus_stats();
        let d = PyDict::new(py);
        d.set_item("empty", s.empty)?;
        d.set_item("image_count", s.image_count)?;
        d.set_item("tag_count_median", s.tag_count_median)?;
        d.set_item("tag_count_mean", s.tag_count_mean)?;
        d.set_item("tag_count_sd", s.tag_count_sd)?;
        d.set_item("tag_count_min", s.tag_count_min)?;
        d.set_item("tag_count_max", s.tag_count_max)?;
        Ok(d)
    }

    /// Benchmarks a judged-query file. The curve is a list of
    /// `(rank, mean_precision, mean_recall)`.
    #[pyo3(signature = (queries, max_distance=10, subsample=None, seed=0))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        queries: PathBuf,
        max_distance: u32,
        subsample: Option<f64>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let judged = parse_judged_queries(open(&queries)?).map_err(eval_err)?;
        let options = SearchOptions {
            max_distance,
            subsample: subsample.map(|f| (f, seed)),
            ..Default::default()
        };
        let repo = &self.inner;
        let report = py
            .detach(|| run_benchmark(&judged, repo, None, &options))
            .map_err(eval_err)?;
        let d = PyDict::new(py);
        d.set_item("queries", report.per_query.len())?;
        d.set_item("mean_precision", report.mean_precision)?;
        d.set_item("mean_result_count", report.mean_result_count)?;
        let curve: Vec<(usize, f64, f64)> = report
            .curve
            .iter()
            .map(|p| (p.rank, p.mean_precision, p.mean_recall))
            .collect();
        d.set_item("curve", curve)?;
        Ok(d)
    }
}

/// Synthetic corpus over a generated graph: `(ontology, repository, queries)`
/// where each query is `(text, relevant_ids)`.
#[pyfunction]
#[pyo3(signature = (images=100, seed=0, graph_size=2000, query_count=40))]
fn synth(
    images: usize,
    seed: u64,
    graph_size: usize,
    query_count: usize,
) -> PyResult<(PyOntology, PyRepository, Vec<(String, Vec<u64>)>)> {
    let spec = SyntheticSpec {
        image_count: images,
        graph_size,
        seed,
        query_count,
        ..Default::default()
    };
    let (repo, queries) = generate_synthetic_corpus(&spec, None).map_err(eval_err)?;
    let ontology = PyOntology {
        inner: repo.ontology().clone(),
    };
    let queries = queries
        .into_iter()
        .map(|q| (q.query_text, q.relevant.into_iter().map(|i| i.0).collect()))
        .collect();
    Ok((ontology, PyRepository { inner: repo }, queries))
}

#[pymodule]
#[pyo3(name = "wntags")]
fn wntags_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOntology>()?;
    m.add_class::<PyRepository>()?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add("DEFAULT_MAX_DISTANCE", wntags::retrieval::DEFAULT_MAX_DISTANCE)?;
    Ok(())
}
