//! Fixture repository and the endpoint example table.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{HeaderMap, Method, Request, StatusCode};
use serde_json::{json, Value};
use tower::ServiceExt;

use wntags::ontology::{OntologyGraph, Pos, Sense, SynsetId};
use wntags::repository::{EmotionTuple, ImageId, Repository};
use wntags_service::{router, AppState};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn toy_graph() -> Arc<OntologyGraph> {
    Arc::new(OntologyGraph::load_simple_graph_file(fixture_path("toy.graph")).unwrap())
}

pub fn sense(lemma: &str, offset: u32) -> Sense {
    let pos = if offset >= 29 { Pos::Verb } else { Pos::Noun };
    Sense::new(lemma, SynsetId::new(pos, offset))
}

/// Three committed images and one two-tag draft.
pub fn fixture_repo() -> Repository {
    let mut repo = Repository::new(toy_graph());
    let images: [(&str, &str, (f64, f64, f64), &[(&str, u32, f64)], bool); 4] = [
        ("img/beach.jpg", "beach", (7.0, 4.0, 5.0), &[("person", 24, 1.0), ("sea", 20, 0.8), ("sand", 23, 0.5)], true),
        ("img/family.jpg", "family", (8.0, 6.0, 5.0), &[("child", 25, 0.9), ("woman", 26, 0.6), ("dog", 3, 0.4)], true),
        ("img/street.jpg", "street", (3.0, 7.0, 4.0), &[("car", 9, 1.0), ("wheel", 10, 0.5), ("man", 27, 0.3)], true),
        ("img/pets.jpg", "pets", (6.0, 5.0, 5.0), &[("cat", 5, 0.7), ("kitten", 6, 0.5)], false),
    ];
    for (uri, keyword, (v, a, d), tags, committed) in images {
        let emotion = EmotionTuple::new(v, a, d).unwrap();
        let id = repo.add_image(uri, Some(keyword.into()), Some(emotion)).unwrap().id;
        for &(lemma, offset, w) in tags {
            repo.annotate(id, sense(lemma, offset), w, "ann").unwrap();
            let second = (w + 0.05f64).min(1.0);
            repo.annotate(id, sense(lemma, offset), second, "bea").unwrap();
        }
        if committed {
            repo.commit(id).unwrap();
        }
    }
    repo
}

/// A repository whose committed images carry 13, 20 and 28 tags.
pub fn counts_repo() -> Repository {
    let graph = toy_graph();
    let all: Vec<Sense> = graph.synsets().flat_map(|s| graph.synset_senses(s.id)).collect();
    let mut repo = Repository::new(graph);
    for n in [13, 20, 28] {
        let id = repo.add_image(&format!("img/{n}.jpg"), None, None).unwrap().id;
        for s in all.iter().take(n) {
            repo.annotate(id, s.clone(), 0.5, "ann").unwrap();
        }
        repo.commit(id).unwrap();
    }
    repo
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Value,
}

pub async fn call(state: &Arc<AppState>, method: Method, uri: &str, body: Option<Value>) -> Reply {
    call_raw(state, method, uri, body.map(|b| (b.to_string(), true))).await
}

/// `body` is `(text, send json content type)`.
pub async fn call_raw(state: &Arc<AppState>, method: Method, uri: &str, body: Option<(String, bool)>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some((text, typed)) => {
            if typed {
                req = req.header("content-type", "application/json");
            }
            Body::from(text)
        }
        None => Body::empty(),
    };
    let resp = router(state.clone()).oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let body = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    Reply { status, headers, body }
}

pub fn state(repo: Repository) -> Arc<AppState> {
    Arc::new(AppState::new(repo))
}

type Check = fn(&Reply) -> Result<(), String>;

/// One documented example: request, expected status, extra check.
pub struct Example {
    pub name: &'static str,
    pub repo: fn() -> Repository,
    pub method: Method,
    pub uri: &'static str,
    pub body: Option<(&'static str, bool)>,
    pub status: StatusCode,
    pub check: Check,
}

fn empty_repo() -> Repository {
    Repository::new(toy_graph())
}

fn code(r: &Reply, want: &str) -> Result<(), String> {
    match r.body["code"].as_str() {
        Some(c) if c == want => Ok(()),
        other => Err(format!("code {other:?}, want {want}")),
    }
}

fn len(r: &Reply, want: usize) -> Result<(), String> {
    match r.body.as_array() {
        Some(a) if a.len() == want => Ok(()),
        _ => Err(format!("want {want} items, got {}", r.body)),
    }
}

fn relevance_sorted(r: &Reply) -> Result<(), String> {
    let hits = r.body.as_array().ok_or("not a list")?;
    if hits.is_empty() {
        return Err("empty result list".into());
    }
    let rel: Vec<f64> = hits.iter().map(|h| h["relevance"].as_f64().unwrap()).collect();
    if rel.windows(2).any(|w| w[0] < w[1]) {
        return Err(format!("relevance increases: {rel:?}"));
    }
    Ok(())
}

pub fn examples() -> Vec<Example> {
    use Method as M;
    vec![
        Example { name: "list: empty repo", repo: empty_repo, method: M::GET, uri: "/api/images", body: None, status: StatusCode::OK, check: |r| len(r, 0) },
        Example { name: "list: committed=true", repo: fixture_repo, method: M::GET, uri: "/api/images?committed=true", body: None, status: StatusCode::OK, check: |r| len(r, 3) },
        Example {
            name: "list: limit=2 with total header",
            repo: fixture_repo,
            method: M::GET,
            uri: "/api/images?limit=2",
            body: None,
            status: StatusCode::OK,
            check: |r| {
                len(r, 2)?;
                match r.headers.get("x-total-count").map(|v| v.to_str().unwrap()) {
                    Some("4") => Ok(()),
                    other => Err(format!("total {other:?}")),
                }
            },
        },
        Example {
            name: "create: valid body",
            repo: fixture_repo,
            method: M::POST,
            uri: "/api/images",
            body: Some((r#"{"uri":"img/new.jpg","keyword":"new","emotion":{"val":5,"ar":5,"dom":5}}"#, true)),
            status: StatusCode::CREATED,
            check: |r| if r.body["id"] == json!(5) { Ok(()) } else { Err(format!("id {}", r.body["id"])) },
        },
        Example { name: "create: valence 0", repo: fixture_repo, method: M::POST, uri: "/api/images", body: Some((r#"{"uri":"x","emotion":{"val":0,"ar":5,"dom":5}}"#, true)), status: StatusCode::UNPROCESSABLE_ENTITY, check: |r| code(r, "emotion_out_of_range") },
        Example { name: "create: missing uri", repo: fixture_repo, method: M::POST, uri: "/api/images", body: Some((r#"{"keyword":"x"}"#, true)), status: StatusCode::UNPROCESSABLE_ENTITY, check: |r| code(r, "invalid_body") },
        Example { name: "create: no json content type", repo: fixture_repo, method: M::POST, uri: "/api/images", body: Some((r#"{"uri":"x"}"#, false)), status: StatusCode::UNSUPPORTED_MEDIA_TYPE, check: |r| code(r, "unsupported_media_type") },
        Example {
            name: "annotate: valid",
            repo: fixture_repo,
            method: M::POST,
            uri: "/api/images/4/annotations",
            body: Some((r#"{"lemma":"puppy","pos":"n","offset":4,"weight":0.8,"annotator":"cy"}"#, true)),
            status: StatusCode::OK,
            check: |r| {
                let tag = &r.body["tags"][2];
                if tag["lemma"] == "puppy" && tag["mean_weight"] == json!(0.8) && tag["raters"] == 1 { Ok(()) } else { Err(tag.to_string()) }
            },
        },
        Example { name: "annotate: weight -0.1", repo: fixture_repo, method: M::POST, uri: "/api/images/4/annotations", body: Some((r#"{"lemma":"puppy","pos":"n","offset":4,"weight":-0.1,"annotator":"cy"}"#, true)), status: StatusCode::UNPROCESSABLE_ENTITY, check: |r| code(r, "weight_out_of_range") },
        Example { name: "annotate: bogus offset", repo: fixture_repo, method: M::POST, uri: "/api/images/4/annotations", body: Some((r#"{"lemma":"puppy","pos":"n","offset":999999,"weight":0.5,"annotator":"cy"}"#, true)), status: StatusCode::UNPROCESSABLE_ENTITY, check: |r| code(r, "unknown_sense") },
        Example { name: "annotate: unknown image", repo: fixture_repo, method: M::POST, uri: "/api/images/99/annotations", body: Some((r#"{"lemma":"puppy","pos":"n","offset":4,"weight":0.5,"annotator":"cy"}"#, true)), status: StatusCode::NOT_FOUND, check: |r| code(r, "unknown_image") },
        Example {
            name: "commit: 3 senses",
            repo: || {
                let mut repo = fixture_repo();
                repo.annotate(ImageId(4), sense("puppy", 4), 0.5, "ann").unwrap();
                repo
            },
            method: M::POST,
            uri: "/api/images/4/commit",
            body: None,
            status: StatusCode::OK,
            check: |r| if r.body["committed"] == true { Ok(()) } else { Err(r.body.to_string()) },
        },
        Example {
            name: "commit: 2 senses",
            repo: fixture_repo,
            method: M::POST,
            uri: "/api/images/4/commit",
            body: None,
            status: StatusCode::CONFLICT,
            check: |r| {
                code(r, "too_few_senses")?;
                if r.body["found"] == 2 { Ok(()) } else { Err(r.body.to_string()) }
            },
        },
        Example { name: "commit: unknown id", repo: fixture_repo, method: M::POST, uri: "/api/images/42/commit", body: None, status: StatusCode::NOT_FOUND, check: |r| code(r, "unknown_image") },
        Example { name: "search: person", repo: fixture_repo, method: M::GET, uri: "/api/search?q=person", body: None, status: StatusCode::OK, check: relevance_sorted },
        Example { name: "search: qwzx", repo: fixture_repo, method: M::GET, uri: "/api/search?q=qwzx", body: None, status: StatusCode::BAD_REQUEST, check: |r| code(r, "empty_query") },
        Example { name: "search: val=5..3", repo: fixture_repo, method: M::GET, uri: "/api/search?q=person&val=5..3", body: None, status: StatusCode::UNPROCESSABLE_ENTITY, check: |r| code(r, "invalid_range") },
        Example {
            name: "senses: known lemma",
            repo: fixture_repo,
            method: M::GET,
            uri: "/api/ontology/senses?lemma=dog",
            body: None,
            status: StatusCode::OK,
            check: |r| {
                len(r, 3)?;
                let glosses: Vec<&str> = r.body.as_array().unwrap().iter().map(|s| s["gloss"].as_str().unwrap()).collect();
                if glosses == ["pet", "disliked man", "follow"] { Ok(()) } else { Err(format!("{glosses:?}")) }
            },
        },
        Example { name: "senses: unknown", repo: fixture_repo, method: M::GET, uri: "/api/ontology/senses?lemma=qwzx", body: None, status: StatusCode::OK, check: |r| len(r, 0) },
        Example {
            name: "senses: stemmed surface form",
            repo: fixture_repo,
            method: M::GET,
            uri: "/api/ontology/senses?lemma=dogs",
            body: None,
            status: StatusCode::OK,
            check: |r| {
                let all = r.body.as_array().ok_or("not a list")?;
                if !all.is_empty() && all.iter().all(|s| s["stemmed"] == true && s["lemma"] == "dog") { Ok(()) } else { Err(r.body.to_string()) }
            },
        },
        Example {
            name: "stats: counts 13, 20, 28",
            repo: counts_repo,
            method: M::GET,
            uri: "/api/stats",
            body: None,
            status: StatusCode::OK,
            check: |r| {
                let b = &r.body;
                if b["tag_count_median"] == json!(20.0) && b["tag_count_min"] == 13 && b["tag_count_max"] == 28 && b["empty"] == false { Ok(()) } else { Err(b.to_string()) }
            },
        },
        Example { name: "stats: empty", repo: empty_repo, method: M::GET, uri: "/api/stats", body: None, status: StatusCode::OK, check: |r| if r.body["empty"] == true { Ok(()) } else { Err(r.body.to_string()) } },
        Example {
            name: "stats: agreement per tag",
            repo: fixture_repo,
            method: M::GET,
            uri: "/api/stats/agreement",
            body: None,
            status: StatusCode::OK,
            check: |r| {
                let tags = r.body["tags"].as_array().ok_or("no tags")?;
                if tags.len() == 11 && tags.iter().all(|t| t["kappa"].is_number() && t["raters"] == 2) { Ok(()) } else { Err(r.body.to_string()) }
            },
        },
    ]
}

/// Runs one example against a fresh fixture state.
pub async fn run_example(ex: &Example) -> Result<(), String> {
    let st = state((ex.repo)());
    let reply = call_raw(&st, ex.method.clone(), ex.uri, ex.body.map(|(b, t)| (b.to_string(), t))).await;
    if reply.status != ex.status {
        return Err(format!("status {} want {}: {}", reply.status, ex.status, reply.body));
    }
    (ex.check)(&reply)
}

/// Issues every GET example against one state and compares snapshots.
pub async fn gets_are_pure() -> Result<usize, String> {
    let st = state(fixture_repo());
    let before = st.snapshot();
    let mut n = 0;
    for ex in examples().iter().filter(|e| e.method == Method::GET) {
        call(&st, Method::GET, ex.uri, None).await;
        n += 1;
    }
    for uri in ["/api/images/1", "/api/images/4", "/api/images?committed=false&offset=1", "/api/search?q=dog&maxd=3&val=1..9", "/api/stats/agreement?bins=3"] {
        call(&st, Method::GET, uri, None).await;
        n += 1;
    }
    if st.snapshot() == before { Ok(n) } else { Err("a GET changed the repository".into()) }
}
