//! Contract checks shared by the API tests and the acceptance run.

use std::collections::BTreeSet;

use axum::http::StatusCode;
use gwat_core::catalog::Catalog;
use gwat_core::export::StoreImage;
use gwat_core::lexicon::{LexicalType, Lexicon, Synset, SynsetId};
use gwat_core::store::AnnotationStore;
use gwat_service::api::{DetachConfirmation, ExportFormat, PictureDescriptor};
use gwat_service::{router, ApiError, AppState};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use super::{call, delete, encode, get, post_attach, state, Reply};

/// One enumerated error case: request, expected status and error code.
pub struct ErrorCase {
    pub label: &'static str,
    pub method: axum::http::Method,
    pub uri: String,
    pub body: Option<serde_json::Value>,
    pub status: u16,
    pub error_code: &'static str,
}

fn case(
    label: &'static str,
    method: axum::http::Method,
    uri: &str,
    body: Option<serde_json::Value>,
    status: u16,
    error_code: &'static str,
) -> ErrorCase {
    ErrorCase { label, method, uri: uri.to_string(), body, status, error_code }
}

/// Error cases against a manifest-mode app on the full GAPED manifest with
/// `P001.bmp` annotated with `n02084071`.
pub fn error_cases() -> Vec<ErrorCase> {
    use axum::http::Method;
    let json = |p: &str, s: &str| Some(serde_json::json!({ "picture": p, "synset": s }));
    vec![
        case("picture unknown", Method::GET, "/api/pictures/NOPE.bmp", None, 404, "picture_not_found"),
        case("next of unknown", Method::GET, "/api/pictures/NOPE.bmp/next", None, 404, "picture_not_found"),
        case("prev of unknown", Method::GET, "/api/pictures/NOPE.bmp/prev", None, 404, "picture_not_found"),
        case("image in manifest mode", Method::GET, "/api/pictures/A001.bmp/image", None, 404, "image_unavailable"),
        case("image of unknown", Method::GET, "/api/pictures/NOPE.bmp/image", None, 404, "picture_not_found"),
        case("search empty", Method::GET, "/api/search?q=", None, 400, "empty_query"),
        case("search blank", Method::GET, "/api/search?q=%20%20", None, 400, "empty_query"),
        case("search missing q", Method::GET, "/api/search", None, 400, "empty_query"),
        case("attach unknown picture", Method::POST, "/api/annotations", json("NOPE.bmp", "n02084071"), 404, "unknown_picture"),
        case("attach unknown synset", Method::POST, "/api/annotations", json("A001.bmp", "n99999999"), 404, "unknown_synset"),
        case("attach malformed id", Method::POST, "/api/annotations", json("A001.bmp", "dog"), 400, "invalid_synset_id"),
        case("attach duplicate", Method::POST, "/api/annotations", json("P001.bmp", "n02084071"), 409, "already_attached"),
        case(
            "attach bad body",
            Method::POST,
            "/api/annotations",
            Some(serde_json::json!({ "picture": "A001.bmp" })),
            400,
            "invalid_body",
        ),
        case("detach not attached", Method::DELETE, "/api/annotations/A001.bmp/n02084071", None, 404, "not_attached"),
        case("detach unknown picture", Method::DELETE, "/api/annotations/NOPE.bmp/n02084071", None, 404, "not_attached"),
        case("detach malformed id", Method::DELETE, "/api/annotations/A001.bmp/x1", None, 400, "invalid_synset_id"),
        case("export bogus", Method::GET, "/api/export?format=bogus", None, 400, "unknown_format"),
    ]
}

/// Runs every enumerated error case plus the empty-catalog case; returns mismatches.
pub async fn contract_mismatches() -> Vec<String> {
    let app = router(super::fixture_state(), None);
    let seeded = post_attach(&app, "P001.bmp", "n02084071").await;
    let mut failures = Vec::new();
    if seeded.status != StatusCode::CREATED {
        failures.push(format!("seed attach returned {}", seeded.status));
    }
    for c in error_cases() {
        let reply = call(&app, c.method.clone(), &c.uri, c.body.clone()).await;
        check_error(&mut failures, c.label, &reply, c.status, c.error_code);
    }

    let empty = state(
        super::fixture_lexicon(),
        Catalog::from_names(Vec::<String>::new()).unwrap(),
        AnnotationStore::open_in_memory().unwrap(),
        500,
    );
    let app = router(empty, None);
    for uri in ["/api/pictures/first", "/api/pictures/last"] {
        let reply = get(&app, uri).await;
        check_error(&mut failures, "empty catalog", &reply, 404, "empty_catalog");
    }
    failures
}

fn check_error(failures: &mut Vec<String>, label: &str, reply: &Reply, status: u16, code: &str) {
    let got_code = serde_json::from_slice::<serde_json::Value>(&reply.body)
        .ok()
        .and_then(|v| v["error_code"].as_str().map(str::to_string))
        .unwrap_or_default();
    if reply.status.as_u16() != status || got_code != code {
        failures.push(format!(
            "{label}: expected {status} {code}, got {} {got_code}",
            reply.status.as_u16()
        ));
    }
}

const SYLLABLES: &[&str] = &["fly", "ca", "do", "g", "an", "ti", "Zu", "mé", "ck", "o"];

fn random_word(rng: &mut StdRng) -> String {
    (0..rng.random_range(1..=3))
        .map(|_| *SYLLABLES.choose(rng).unwrap())
        .collect()
}

fn random_lemma(rng: &mut StdRng) -> String {
    let words: Vec<String> = (0..rng.random_range(1..=2)).map(|_| random_word(rng)).collect();
    words.join("_")
}

fn random_gloss(rng: &mut StdRng) -> String {
    const PIECES: &[&str] = &["plain", "it's", "\"quoted\"", "a, b", "line\nbreak", "semi;", "100%", "back\\slash"];
    (0..rng.random_range(1..=4))
        .map(|_| *PIECES.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_lexicon(rng: &mut StdRng) -> Lexicon {
    let mut used = BTreeSet::new();
    let mut synsets = Vec::new();
    for _ in 0..rng.random_range(5..=40) {
        let t = *LexicalType::ALL.choose(rng).unwrap();
        let id = SynsetId::new(t, rng.random_range(0..5_000)).unwrap();
        if !used.insert(id) {
            continue;
        }
        let lemmas = (0..rng.random_range(1..=3)).map(|_| random_lemma(rng)).collect();
        synsets.push(Synset::new(id, lemmas, random_gloss(rng)).unwrap());
    }
    Lexicon::from_synsets(synsets).unwrap()
}

fn random_catalog(rng: &mut StdRng, full: &Catalog) -> Catalog {
    let size = rng.random_range(1..=40);
    let names: Vec<String> = full
        .entries()
        .choose_multiple(rng, size)
        .map(|p| p.filename.clone())
        .collect();
    Catalog::from_names(names).unwrap()
}

fn random_id(rng: &mut StdRng, lexicon: &Lexicon) -> SynsetId {
    if rng.random_bool(0.85) {
        let all: Vec<SynsetId> = lexicon.synsets().map(|s| s.id()).collect();
        *all.choose(rng).unwrap()
    } else {
        SynsetId::new(*LexicalType::ALL.choose(rng).unwrap(), rng.random_range(5_000..6_000)).unwrap()
    }
}

fn random_picture(rng: &mut StdRng, catalog: &Catalog) -> String {
    if rng.random_bool(0.9) {
        catalog.entries().choose(rng).unwrap().filename.clone()
    } else {
        ["NOPE.bmp", "a001.bmp", "A001.BMP", "P 1.bmp"].choose(rng).unwrap().to_string()
    }
}

fn random_query(rng: &mut StdRng, lexicon: &Lexicon) -> String {
    match rng.random_range(0..6) {
        0 => String::new(),
        1 => random_word(rng),
        2 => (0..rng.random_range(1..=3))
            .map(|_| rng.random_range(b'a'..=b'z') as char)
            .collect(),
        _ => {
            let synset = lexicon.synsets().nth(rng.random_range(0..lexicon.len())).unwrap();
            let lemma = synset.lemmas().choose(rng).unwrap().replace('_', " ");
            let chars: Vec<char> = lemma.chars().collect();
            let mut start = 0;
            if rng.random_bool(0.3) {
                start = chars.iter().position(|c| *c == ' ').map_or(0, |p| p + 1);
            }
            let end = rng.random_range(start + 1..=chars.len());
            let text: String = chars[start..end].iter().collect();
            if rng.random_bool(0.3) { text.to_uppercase() } else { text }
        }
    }
}

fn expected_error(err: impl Into<ApiError>) -> (StatusCode, serde_json::Value) {
    let err = err.into();
    (
        err.status,
        serde_json::json!({ "error_code": err.error_code, "message": err.message }),
    )
}

fn compare_json<T: serde::Serialize>(
    label: &str,
    reply: &Reply,
    expected: Result<T, (StatusCode, serde_json::Value)>,
    ok_status: StatusCode,
) -> Result<(), String> {
    match expected {
        Ok(value) => {
            let bytes = serde_json::to_vec(&value).unwrap();
            if reply.status != ok_status || reply.body != bytes {
                return Err(format!(
                    "{label}: API {} {:?} differs from module {}",
                    reply.status,
                    String::from_utf8_lossy(&reply.body),
                    String::from_utf8_lossy(&bytes)
                ));
            }
        }
        Err((status, body)) => {
            let got: serde_json::Value = serde_json::from_slice(&reply.body).unwrap_or_default();
            if reply.status != status || got != body {
                return Err(format!("{label}: API {} {got} differs from module {status} {body}", reply.status));
            }
        }
    }
    Ok(())
}

/// One randomized scenario: random lexicon, catalog subset and operation mix,
/// each API answer compared with the direct module call.
pub async fn equivalence_scenario(seed: u64, full_catalog: &Catalog) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let lexicon = random_lexicon(&mut rng);
    let catalog = random_catalog(&mut rng, full_catalog);
    let search_limit = *[1usize, 3, 10, 500].choose(&mut rng).unwrap();
    let app_state: AppState = state(lexicon, catalog, AnnotationStore::open_in_memory().unwrap(), search_limit);
    let app = router(app_state.clone(), None);
    // Writes are mirrored on a twin store so outcomes can be compared.
    let twin = AnnotationStore::open_in_memory().unwrap();
    let (lexicon, catalog, store) = (&*app_state.lexicon, &*app_state.catalog, &*app_state.store);

    for step in 0..40 {
        let label = format!("seed {seed} step {step}");
        match rng.random_range(0..10) {
            0 => {
                let (uri, expected) = if rng.random_bool(0.5) {
                    ("/api/pictures/first".to_string(), catalog.first())
                } else {
                    ("/api/pictures/last".to_string(), catalog.last())
                };
                let reply = get(&app, &uri).await;
                let expected = expected.map(|p| PictureDescriptor::new(p, catalog)).map_err(expected_error);
                compare_json(&format!("{label} {uri}"), &reply, expected, StatusCode::OK)?;
            }
            1 => {
                let name = random_picture(&mut rng, catalog);
                let which = rng.random_range(0..3);
                let suffix = ["", "/next", "/prev"][which];
                let uri = format!("/api/pictures/{}{suffix}", encode(&name));
                let expected = catalog.find(&name).and_then(|p| match which {
                    0 => Ok(p),
                    1 => catalog.next(p),
                    _ => catalog.prev(p),
                });
                let expected = expected.map(|p| PictureDescriptor::new(p, catalog)).map_err(expected_error);
                let reply = get(&app, &uri).await;
                compare_json(&format!("{label} {uri}"), &reply, expected, StatusCode::OK)?;
            }
            2 | 3 => {
                let query = random_query(&mut rng, lexicon);
                let uri = format!("/api/search?q={}", encode(&query));
                let reply = get(&app, &uri).await;
                let expected = lexicon.search(&query, search_limit).map_err(expected_error);
                compare_json(&format!("{label} {uri}"), &reply, expected, StatusCode::OK)?;
            }
            4 | 5 => {
                let picture = random_picture(&mut rng, catalog);
                let id = random_id(&mut rng, lexicon);
                let reply = post_attach(&app, &picture, &id.to_string()).await;
                let mirrored = twin.attach(catalog, lexicon, &picture, id);
                match mirrored {
                    Ok(_) => {
                        // Timestamps differ between twins; compare with the row the API stored.
                        let stored = store
                            .annotations_for(&picture)
                            .map_err(|e| e.to_string())?
                            .into_iter()
                            .find(|a| a.synset_id == id)
                            .ok_or_else(|| format!("{label}: attach not persisted"))?;
                        compare_json(&format!("{label} attach"), &reply, Ok(stored), StatusCode::CREATED)?;
                    }
                    Err(err) => {
                        compare_json::<()>(&format!("{label} attach"), &reply, Err(expected_error(err)), StatusCode::CREATED)?
                    }
                }
            }
            6 => {
                let existing = store.annotations().map_err(|e| e.to_string())?;
                let (picture, id) = match existing.choose(&mut rng) {
                    Some(a) if rng.random_bool(0.8) => (a.picture_name.clone(), a.synset_id),
                    _ => (random_picture(&mut rng, catalog), random_id(&mut rng, lexicon)),
                };
                let reply = delete(&app, &picture, &id.to_string()).await;
                let expected = twin
                    .detach(&picture, id)
                    .map(|()| DetachConfirmation { picture_name: picture.clone(), synset_id: id, deleted: true })
                    .map_err(expected_error);
                compare_json(&format!("{label} detach"), &reply, expected, StatusCode::OK)?;
            }
            7 => {
                let picture = random_picture(&mut rng, catalog);
                let uri = format!("/api/pictures/{}/annotations", encode(&picture));
                let reply = get(&app, &uri).await;
                let expected = store.list_for_picture(lexicon, &picture).map_err(expected_error);
                compare_json(&format!("{label} {uri}"), &reply, expected, StatusCode::OK)?;
                let again = get(&app, &uri).await;
                if again.body != reply.body || again.status != reply.status {
                    return Err(format!("{label}: repeated GET {uri} changed"));
                }
            }
            8 => {
                let format = *["sql", "csv", "json"].choose(&mut rng).unwrap();
                let uri = format!("/api/export?format={format}");
                let reply = get(&app, &uri).await;
                let image = StoreImage::capture(store, lexicon).map_err(|e| e.to_string())?;
                let expected = ExportFormat::parse(format).unwrap().render(&image);
                if reply.status != StatusCode::OK || reply.body != expected.as_bytes() {
                    return Err(format!("{label}: export {format} differs from module output"));
                }
                if reply.content_type() != ExportFormat::parse(format).unwrap().content_type() {
                    return Err(format!("{label}: export {format} content type {}", reply.content_type()));
                }
            }
            _ => {
                let reply = get(&app, "/api/stats").await;
                let expected = store.stats().map_err(expected_error);
                compare_json(&format!("{label} stats"), &reply, expected, StatusCode::OK)?;
            }
        }
    }

    let api_pairs: BTreeSet<_> = store
        .annotations()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|a| (a.picture_name, a.synset_id))
        .collect();
    let twin_pairs: BTreeSet<_> = twin
        .annotations()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|a| (a.picture_name, a.synset_id))
        .collect();
    if api_pairs != twin_pairs {
        return Err(format!("seed {seed}: API store diverged from direct store"));
    }
    Ok(())
}
