#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use gwat_core::catalog::Catalog;
use gwat_core::lexicon::{LexicalType, Lexicon, Synset, SynsetId};
use gwat_core::store::AnnotationStore;
use gwat_service::AppState;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn gaped_manifest() -> PathBuf {
    workspace_root().join("fixtures/gaped-manifest.txt")
}

pub fn gaped_catalog() -> Catalog {
    Catalog::from_manifest_file(gaped_manifest()).expect("manifest fixture")
}

/// Location of a full WordNet dict, if one has been fetched.
pub fn wordnet_dict() -> Option<PathBuf> {
    let dir = std::env::var_os("GWAT_WORDNET_DICT")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/wordnet/dict"));
    dir.join("data.noun").is_file().then_some(dir)
}

pub fn id(t: LexicalType, offset: u32) -> SynsetId {
    SynsetId::new(t, offset).unwrap()
}

pub fn synset(t: LexicalType, offset: u32, lemmas: &[&str], gloss: &str) -> Synset {
    Synset::new(
        id(t, offset),
        lemmas.iter().map(|l| l.to_string()).collect(),
        gloss,
    )
    .unwrap()
}

/// Small hand-written lexicon covering every lexical type.
pub fn fixture_lexicon() -> Lexicon {
    use LexicalType::*;
    Lexicon::from_synsets([
        synset(Noun, 2084071, &["dog", "domestic_dog", "Canis_familiaris"], "a member of the genus Canis"),
        synset(Noun, 2190166, &["fly"], "two-winged insects characterized by active flight"),
        synset(Noun, 3396074, &["fly", "fly_front"], "an opening in a garment; \"he zipped his fly\""),
        synset(Noun, 9247410, &["cloud"], "a visible mass of water, or ice particles"),
        synset(Verb, 1940403, &["fly", "wing"], "travel through the air; be airborne"),
        synset(Verb, 2084804, &["flee", "take_flight", "fly"], "run away quickly"),
        synset(Adjective, 1139826, &["flyaway"], "(of hair) loose and tending to fly"),
        synset(Adjective, 1150915, &["happy"], "enjoying or showing joy, pleasure"),
        synset(Adverb, 92136, &["happily", "merrily"], "in a joyous manner"),
        synset(Adverb, 150202, &["flying_high"], "in high spirits,\nelated"),
    ])
    .unwrap()
}

pub fn state(lexicon: Lexicon, catalog: Catalog, store: AnnotationStore, search_limit: usize) -> AppState {
    AppState {
        lexicon: Arc::new(lexicon),
        catalog: Arc::new(catalog),
        store: Arc::new(store),
        search_limit,
    }
}

pub fn fixture_state() -> AppState {
    state(
        fixture_lexicon(),
        gaped_catalog(),
        AnnotationStore::open_in_memory().unwrap(),
        500,
    )
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }

    pub fn error_code(&self) -> String {
        self.json()["error_code"].as_str().unwrap_or_default().to_string()
    }

    pub fn content_type(&self) -> &str {
        self.headers
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<serde_json::Value>) -> Reply {
    let mut builder = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(value) => {
            builder = builder.header("content-type", "application/json");
            Body::from(value.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(builder.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, body }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, None).await
}

pub async fn post_attach(app: &Router, picture: &str, synset: &str) -> Reply {
    let body = serde_json::json!({ "picture": picture, "synset": synset });
    call(app, Method::POST, "/api/annotations", Some(body)).await
}

pub async fn delete(app: &Router, picture: &str, synset: &str) -> Reply {
    let uri = format!("/api/annotations/{}/{}", encode(picture), encode(synset));
    call(app, Method::DELETE, &uri, None).await
}

/// Percent-encodes everything outside the unreserved set.
pub fn encode(text: &str) -> String {
    let mut out = String::new();
    for b in text.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub mod scenarios;
