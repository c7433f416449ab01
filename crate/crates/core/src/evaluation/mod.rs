//! Precision / recall benchmarking over judged queries.

mod synth;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ontology::{OntologyError, SimilarityTable};
use crate::repository::{ImageId, Repository, RepositoryError};
use crate::retrieval::{search_with_filters, Filters, RetrievalError, SearchOptions};

pub use synth::{generate_synthetic_corpus, synthetic_graph, synthetic_lemma, SyntheticSpec, TagCountDistribution};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("rank must be at least 1")]
    InvalidK,
    #[error("judgment has no relevant images")]
    EmptyJudgment,
    #[error("benchmark has no queries")]
    NoQueries,
    #[error("judged image {0} is not in the repository")]
    UnknownImage(ImageId),
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Repository(#[from] RepositoryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JudgedQuery {
    pub query_text: String,
    pub relevant: BTreeSet<ImageId>,
}

impl JudgedQuery {
    pub fn new(
        query_text: impl Into<String>,
        relevant: impl IntoIterator<Item = ImageId>,
    ) -> Result<Self, EvaluationError> {
        let relevant: BTreeSet<ImageId> = relevant.into_iter().collect();
        if relevant.is_empty() {
            return Err(EvaluationError::EmptyJudgment);
        }
        Ok(Self {
            query_text: query_text.into(),
            relevant,
        })
    }
}

/// `|relevant ∩ top-k| / min(k, |ranked|)`, or 0 for an empty ranking.
pub fn precision_at_k(
    ranked: &[ImageId],
    relevant: &BTreeSet<ImageId>,
    k: usize,
) -> Result<f64, EvaluationError> {
    if k == 0 {
        return Err(EvaluationError::InvalidK);
    }
    let depth = k.min(ranked.len());
    if depth == 0 {
        return Ok(0.0);
    }
    let hits = ranked[..depth].iter().filter(|id| relevant.contains(id)).count();
    Ok(hits as f64 / depth as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallProfile {
    pub result_count: usize,
    /// Entry `k - 1` is `|relevant ∩ top-k| / |relevant|`.
    pub normalized_recall_at_k: Vec<f64>,
}

pub fn recall_profile(
    ranked: &[ImageId],
    relevant: &BTreeSet<ImageId>,
) -> Result<RecallProfile, EvaluationError> {
    if relevant.is_empty() {
        return Err(EvaluationError::EmptyJudgment);
    }
    let total = relevant.len() as f64;
    let mut hits = 0usize;
    let normalized_recall_at_k = ranked
        .iter()
        .map(|id| {
            hits += usize::from(relevant.contains(id));
            hits as f64 / total
        })
        .collect();
    Ok(RecallProfile {
        result_count: ranked.len(),
        normalized_recall_at_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryOutcome {
    pub query: String,
    pub result_count: usize,
    pub precision_at_k: Vec<f64>,
    pub normalized_recall_at_k: Vec<f64>,
    /// Mean of `precision_at_k`.
    pub average_precision: f64,
    /// Search failure, if any. Failed queries are scored as empty rankings.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub rank: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_query: Vec<QueryOutcome>,
    pub mean_precision: f64,
    pub mean_result_count: f64,
    pub curve: Vec<CurvePoint>,
}

/// Produces a ranking for a judged query.
pub trait Ranker: Sync {
    fn rank(&self, query: &JudgedQuery) -> Result<Vec<ImageId>, String>;
}

/// The retrieval engine over a repository.
pub struct EngineRanker<'a> {
    pub repository: &'a Repository,
    pub table: Option<&'a SimilarityTable>,
    pub options: SearchOptions,
    pub filters: Filters,
}

impl Ranker for EngineRanker<'_> {
    fn rank(&self, query: &JudgedQuery) -> Result<Vec<ImageId>, String> {
        search_with_filters(
            &query.query_text,
            self.repository,
            self.table,
            &self.options,
            &self.filters,
        )
        .map(|r| r.into_iter().map(|r| r.image_id).collect())
        .map_err(|e| e.to_string())
    }
}

/// Returns exactly the judged images, in id order.
pub struct OracleRanker;

impl Ranker for OracleRanker {
    fn rank(&self, query: &JudgedQuery) -> Result<Vec<ImageId>, String> {
        Ok(query.relevant.iter().copied().collect())
    }
}

fn outcome(query: &JudgedQuery, ranked: Result<Vec<ImageId>, String>) -> QueryOutcome {
    let (ranked, error) = match ranked {
        Ok(r) => (r, None),
        Err(e) => (Vec::new(), Some(e)),
    };
    let profile = recall_profile(&ranked, &query.relevant).expect("judgments are non-empty");
    let (precision_at_k, normalized_recall_at_k) = if ranked.is_empty() {
        (vec![0.0], vec![0.0])
    } else {
        let p = (1..=ranked.len())
            .map(|k| precision_at_k(&ranked, &query.relevant, k).expect("k >= 1"))
            .collect();
        (p, profile.normalized_recall_at_k)
    };
    let average_precision = precision_at_k.iter().sum::<f64>() / precision_at_k.len() as f64;
    QueryOutcome {
        query: query.query_text.clone(),
        result_count: profile.result_count,
        precision_at_k,
        normalized_recall_at_k,
        average_precision,
        error,
    }
}

/// Builds a report from per-query outcomes. A query contributes to rank `k`
/// only if it has a precision entry there; zero-result queries carry a
/// single 0 at rank 1.
pub fn aggregate(per_query: Vec<QueryOutcome>) -> EvaluationReport {
    let n = per_query.len().max(1) as f64;
    let depth = per_query.iter().map(|q| q.precision_at_k.len()).max().unwrap_or(0);
    let curve = (0..depth)
        .map(|i| {
            let (mut p, mut r, mut count) = (0.0, 0.0, 0usize);
            for q in per_query.iter().filter(|q| q.precision_at_k.len() > i) {
                p += q.precision_at_k[i];
                r += q.normalized_recall_at_k[i];
                count += 1;
            }
            CurvePoint {
                rank: i + 1,
                mean_precision: p / count as f64,
                mean_recall: r / count as f64,
            }
        })
        .collect();
    EvaluationReport {
        mean_precision: per_query.iter().map(|q| q.average_precision).sum::<f64>() / n,
        mean_result_count: per_query.iter().map(|q| q.result_count as f64).sum::<f64>() / n,
        per_query,
        curve,
    }
}

/// Runs every query through `ranker`. Queries are ranked concurrently and
/// aggregated in input order.
pub fn run_benchmark_with(
    queries: &[JudgedQuery],
    ranker: &dyn Ranker,
) -> Result<EvaluationReport, EvaluationError> {
    if queries.is_empty() {
        return Err(EvaluationError::NoQueries);
    }
    let per_query = queries
        .par_iter()
        .map(|q| outcome(q, ranker.rank(q)))
        .collect();
    Ok(aggregate(per_query))
}

/// Sequential counterpart of [`run_benchmark_with`].
pub fn run_benchmark_sequential(
    queries: &[JudgedQuery],
    ranker: &dyn Ranker,
) -> Result<EvaluationReport, EvaluationError> {
    if queries.is_empty() {
        return Err(EvaluationError::NoQueries);
    }
    Ok(aggregate(queries.iter().map(|q| outcome(q, ranker.rank(q))).collect()))
}

/// Benchmarks the retrieval engine. Every judged image must exist in the
/// repository, and option errors fail the run rather than single queries.
pub fn run_benchmark(
    queries: &[JudgedQuery],
    repository: &Repository,
    table: Option<&SimilarityTable>,
    options: &SearchOptions,
) -> Result<EvaluationReport, EvaluationError> {
    if let Some((fraction, _)) = options.subsample {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(RetrievalError::InvalidFraction(fraction).into());
        }
    }
    if options.max_distance > crate::ontology::MAX_DISTANCE_CAP {
        return Err(RetrievalError::from(OntologyError::DistanceTooLarge(options.max_distance)).into());
    }
    for q in queries {
        if let Some(id) = q.relevant.iter().find(|id| repository.image(**id).is_none()) {
            return Err(EvaluationError::UnknownImage(*id));
        }
    }
    let ranker = EngineRanker {
        repository,
        table,
        options: options.clone(),
        filters: Filters::default(),
    };
    run_benchmark_with(queries, &ranker)
}

pub fn emit_curve_csv<W: Write>(report: &EvaluationReport, mut out: W) -> std::io::Result<()> {
    out.write_all(b"rank,mean_precision,mean_recall\n")?;
    for p in &report.curve {
        writeln!(out, "{},{:.6},{:.6}", p.rank, p.mean_precision, p.mean_recall)?;
    }
    out.flush()
}

/// Reads `query<TAB>id,id,...` lines. Blank lines and `#` comments are
/// skipped.
pub fn parse_judged_queries<R: BufRead>(reader: R) -> Result<Vec<JudgedQuery>, EvaluationError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |reason: String| EvaluationError::MalformedLine { line: lineno, reason };
        let (text, ids) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected query<TAB>ids".into()))?;
        if text.trim().is_empty() {
            return Err(bad("empty query".into()));
        }
        let ids = ids
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<ImageId>().map_err(|_| bad(format!("bad image id {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let query = JudgedQuery::new(text.trim(), ids)
            .map_err(|_| bad("no relevant images".into()))?;
        out.push(query);
    }
    Ok(out)
}

pub fn write_judged_queries<W: Write>(queries: &[JudgedQuery], mut out: W) -> std::io::Result<()> {
    for q in queries {
        let ids: Vec<String> = q.relevant.iter().map(ToString::to_string).collect();
        writeln!(out, "{}\t{}", q.query_text, ids.join(","))?;
    }
    out.flush()
}
