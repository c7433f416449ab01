//! HTTP/JSON front end for a repository: image records, annotation, commit,
//! ranked search, sense lookup and corpus statistics.
//!
//! Writes take the repository lock exclusively; reads share it, so every
//! response is computed from one consistent snapshot.

mod error;
pub mod wire;

use std::future::Future;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, PoisonError, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header::HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tokio::net::TcpListener;

use wntags::ontology::{normalize_lemma, normalize_surface, Pos, SimilarityTable, MAX_DISTANCE_CAP};
use wntags::repository::{AgreementConfig, ImageId, Repository, RepositoryError};
use wntags::retrieval::{
    search_with_filters, AffectFilter, Filters, RetrievalError, SearchOptions, ValueRange,
};

pub use error::ApiError;
use wire::{AgreementView, ImageResource, NewAnnotation, NewImage, SearchHit, SenseEntry};

pub const DEFAULT_PAGE_LIMIT: usize = 50;
pub const TOTAL_COUNT_HEADER: &str = "x-total-count";

/// Shared server state.
pub struct AppState {
    repo: RwLock<Repository>,
    table: Option<SimilarityTable>,
    store: Option<PathBuf>,
}

impl AppState {
    pub fn new(repo: Repository) -> Self {
        Self {
            repo: RwLock::new(repo),
            table: None,
            store: None,
        }
    }

    pub fn with_table(mut self, table: SimilarityTable) -> Self {
        self.table = Some(table);
        self
    }

    /// File written by [`flush`](Self::flush).
    pub fn with_store(mut self, path: impl Into<PathBuf>) -> Self {
        self.store = Some(path.into());
        self
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Repository> {
        self.repo.read().unwrap_or_else(PoisonError::into_inner)
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Repository> {
        self.repo.write().unwrap_or_else(PoisonError::into_inner)
    }

    /// Serialized repository, for snapshot comparison.
    pub fn snapshot(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.read().save(&mut out).expect("writing to memory");
        out
    }

    /// Writes the repository to its store file, if any, via a temp file.
    pub fn flush(&self) -> Result<Option<PathBuf>, RepositoryError> {
        let Some(path) = &self.store else {
            return Ok(None);
        };
        save_atomic(&self.read(), path)?;
        Ok(Some(path.clone()))
    }
}

pub fn save_atomic(repo: &Repository, path: &Path) -> Result<(), RepositoryError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = std::fs::File::create(&tmp)?;
    let mut writer = io::BufWriter::new(file);
    repo.save(&mut writer)?;
    io::Write::flush(&mut writer)?;
    writer.get_ref().sync_all()?;
    drop(writer);
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/images", get(list_images).post(create_image))
        .route("/api/images/{id}", get(get_image))
        .route("/api/images/{id}/annotations", post(annotate))
        .route("/api/images/{id}/commit", post(commit))
        .route("/api/search", get(search))
        .route("/api/ontology/senses", get(senses))
        .route("/api/stats", get(stats))
        .route("/api/stats/agreement", get(agreement))
        .fallback(|| async { ApiError::not_found("unknown_route", "no such endpoint") })
        .with_state(state)
}

/// Serves until `shutdown` resolves, then flushes the store.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    state.flush().map_err(io::Error::other)?;
    Ok(())
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

fn parse_id(raw: &str) -> ApiResult<ImageId> {
    raw.parse()
        .map_err(|_| ApiError::not_found("unknown_image", format!("unknown image {raw}")))
}

fn parse_opt<T: FromStr>(raw: Option<&str>, code: &'static str, what: &str) -> ApiResult<Option<T>> {
    match raw.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| ApiError::invalid(code, format!("invalid {what}: {s:?}"))),
    }
}

#[derive(Debug, Default, Deserialize)]
struct ListParams {
    committed: Option<String>,
    offset: Option<String>,
    limit: Option<String>,
}

async fn list_images(State(state): Shared, params: Result<Query<ListParams>, QueryRejection>) -> ApiResult<Response> {
    let Query(params) = params?;
    let committed: Option<bool> = parse_opt(params.committed.as_deref(), "invalid_committed", "committed flag")?;
    let offset: usize = parse_opt(params.offset.as_deref(), "invalid_pagination", "offset")?.unwrap_or(0);
    let limit: usize =
        parse_opt(params.limit.as_deref(), "invalid_pagination", "limit")?.unwrap_or(DEFAULT_PAGE_LIMIT);
    let repo = state.read();
    let selected: Vec<_> = repo
        .images()
        .filter(|r| committed.is_none_or(|c| r.committed == c))
        .collect();
    let page: Vec<ImageResource> = selected
        .iter()
        .skip(offset)
        .take(limit)
        .map(|r| ImageResource::summary(r))
        .collect();
    let mut response = Json(page).into_response();
    response.headers_mut().insert(
        HeaderName::from_static(TOTAL_COUNT_HEADER),
        HeaderValue::from(selected.len()),
    );
    Ok(response)
}

async fn get_image(State(state): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Json<ImageResource>> {
    let id = parse_id(&id)?;
    let repo = state.read();
    let record = repo.image(id).ok_or(RepositoryError::UnknownImage(id))?;
    Ok(Json(ImageResource::detail(record)))
}

async fn create_image(
    State(state): Shared,
    body: Result<Json<NewImage>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<ImageResource>)> {
    let Json(body) = body?;
    let mut repo = state.write();
    let record = repo.add_image(&body.uri, body.keyword, body.emotion)?;
    Ok((StatusCode::CREATED, Json(ImageResource::detail(record))))
}

async fn annotate(
    State(state): Shared,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<NewAnnotation>, JsonRejection>,
) -> ApiResult<Json<ImageResource>> {
    let id = parse_id(&id)?;
    let Json(body) = body?;
    let annotator = body.annotator.trim();
    if annotator.is_empty() {
        return Err(ApiError::invalid("invalid_annotator", "annotator is empty"));
    }
    let pos: Pos = body.pos.parse()?;
    let sense = wntags::ontology::Sense::new(
        normalize_surface(&body.lemma),
        wntags::ontology::SynsetId::new(pos, body.offset),
    );
    let mut repo = state.write();
    let record = repo.annotate(id, sense, body.weight, annotator)?;
    Ok(Json(ImageResource::detail(record)))
}

async fn commit(State(state): Shared, UrlPath(id): UrlPath<String>) -> ApiResult<Json<ImageResource>> {
    let id = parse_id(&id)?;
    let mut repo = state.write();
    let record = repo.commit(id)?;
    Ok(Json(ImageResource::detail(record)))
}

#[derive(Debug, Default, Deserialize)]
struct SearchParams {
    q: Option<String>,
    maxd: Option<String>,
    minrel: Option<String>,
    val: Option<String>,
    ar: Option<String>,
    dom: Option<String>,
    keyword: Option<String>,
    limit: Option<String>,
}

fn parse_range(raw: Option<&str>) -> ApiResult<Option<ValueRange>> {
    match raw.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => Ok(Some(s.parse::<ValueRange>()?)),
    }
}

fn search_request(params: &SearchParams) -> ApiResult<(String, SearchOptions, Filters)> {
    let q = params.q.as_deref().unwrap_or("").trim().to_string();
    if q.is_empty() {
        return Err(RetrievalError::EmptyQuery.into());
    }
    let mut options = SearchOptions::default();
    if let Some(d) = parse_opt::<u32>(params.maxd.as_deref(), "invalid_max_distance", "maxd")? {
        if d > MAX_DISTANCE_CAP {
            return Err(ApiError::invalid(
                "max_distance_out_of_range",
                format!("maxd {d} outside [0, {MAX_DISTANCE_CAP}]"),
            ));
        }
        options.max_distance = d;
    }
    if let Some(m) = parse_opt::<f64>(params.minrel.as_deref(), "invalid_min_relevance", "minrel")? {
        if !(0.0..=1.0).contains(&m) {
            return Err(ApiError::invalid(
                "min_relevance_out_of_range",
                format!("minrel {m} outside [0, 1]"),
            ));
        }
        options.min_relevance = m;
    }
    options.limit = parse_opt(params.limit.as_deref(), "invalid_limit", "limit")?;
    let filters = Filters {
        affect: AffectFilter {
            valence: parse_range(params.val.as_deref())?,
            arousal: parse_range(params.ar.as_deref())?,
            dominance: parse_range(params.dom.as_deref())?,
        },
        keyword: params
            .keyword
            .as_deref()
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .map(String::from),
    };
    Ok((q, options, filters))
}

async fn search(State(state): Shared, params: Result<Query<SearchParams>, QueryRejection>) -> ApiResult<Json<Vec<SearchHit>>> {
    let Query(params) = params?;
    let (q, options, filters) = search_request(&params)?;
    let hits = tokio::task::spawn_blocking(move || -> ApiResult<Vec<SearchHit>> {
        let repo = state.read();
        let results = search_with_filters(&q, &repo, state.table.as_ref(), &options, &filters)?;
        Ok(results
            .iter()
            .enumerate()
            .map(|(i, r)| SearchHit::new(i + 1, r, repo.image(r.image_id).expect("ranked images exist")))
            .collect())
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(hits))
}

#[derive(Debug, Default, Deserialize)]
struct SenseParams {
    lemma: Option<String>,
    pos: Option<String>,
}

async fn senses(State(state): Shared, params: Result<Query<SenseParams>, QueryRejection>) -> ApiResult<Json<Vec<SenseEntry>>> {
    let Query(params) = params?;
    let surface = normalize_surface(params.lemma.as_deref().unwrap_or(""));
    if surface.is_empty() {
        return Err(ApiError::invalid("invalid_lemma", "lemma is empty"));
    }
    let pos: Option<Pos> = match params.pos.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
        Some(p) => Some(p.parse()?),
        None => None,
    };
    let repo = state.read();
    let graph = repo.ontology();
    let mut out = Vec::new();
    for p in Pos::ALL.into_iter().filter(|p| pos.is_none_or(|q| q == *p)) {
        for base in normalize_lemma(&surface, p, graph) {
            let stemmed = base != surface;
            for sense in graph.lookup_senses(&base, Some(p)) {
                out.extend(SenseEntry::new(graph, &sense, stemmed));
            }
        }
    }
    Ok(Json(out))
}

async fn stats(State(state): Shared) -> Json<wntags::repository::CorpusStats> {
    Json(state.read().corpus_stats())
}

#[derive(Debug, Default, Deserialize)]
struct AgreementParams {
    bins: Option<String>,
    threshold: Option<String>,
}

async fn agreement(
    State(state): Shared,
    params: Result<Query<AgreementParams>, QueryRejection>,
) -> ApiResult<Json<AgreementView>> {
    let Query(params) = params?;
    let mut cfg = AgreementConfig::default();
    if let Some(b) = parse_opt(params.bins.as_deref(), "invalid_bins", "bins")? {
        cfg.bins = b;
    }
    if let Some(t) = parse_opt::<f64>(params.threshold.as_deref(), "invalid_threshold", "threshold")? {
        if !(-1.0..=1.0).contains(&t) {
            return Err(ApiError::invalid("threshold_out_of_range", format!("threshold {t} outside [-1, 1]")));
        }
        cfg.threshold = t;
    }
    let report = state.read().agreement_report(&cfg)?;
    Ok(Json(AgreementView::new(&report, cfg.bins, cfg.threshold)))
}
