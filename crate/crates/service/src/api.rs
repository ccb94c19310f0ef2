//! JSON API routes.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use gwat_core::catalog::{Catalog, Category, PictureRef};
use gwat_core::export::StoreImage;
use gwat_core::lexicon::{Lexicon, SearchResultPage, SynsetId};
use gwat_core::store::{Annotation, AnnotationListing, AnnotationStore, StoreStats};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::ApiError;

/// Everything the handlers share. Lexicon and catalog are read-only while serving.
#[derive(Clone)]
pub struct AppState {
    pub lexicon: Arc<Lexicon>,
    pub catalog: Arc<Catalog>,
    pub store: Arc<AnnotationStore>,
    pub search_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PictureDescriptor {
    pub name: String,
    pub category: Category,
    pub category_name: String,
    pub ordinal: usize,
    pub total: usize,
}

impl PictureDescriptor {
    pub fn new(picture: &PictureRef, catalog: &Catalog) -> Self {
        PictureDescriptor {
            name: picture.filename.clone(),
            category: picture.category,
            category_name: picture.category.description().to_string(),
            ordinal: picture.ordinal,
            total: catalog.len(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AttachRequest {
    pub picture: String,
    pub synset: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DetachConfirmation {
    pub picture_name: String,
    pub synset_id: SynsetId,
    pub deleted: bool,
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ExportParams {
    format: Option<String>,
}

/// Export formats offered by `GET /api/export`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Sql,
    Csv,
    Json,
}

impl ExportFormat {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "sql" => Some(ExportFormat::Sql),
            "csv" => Some(ExportFormat::Csv),
            "json" => Some(ExportFormat::Json),
            _ => None,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Sql => "application/sql; charset=utf-8",
            ExportFormat::Csv => "text/csv; charset=utf-8",
            ExportFormat::Json => "application/json",
        }
    }

    pub fn render(self, image: &StoreImage) -> String {
        match self {
            ExportFormat::Sql => image.to_sql(),
            ExportFormat::Csv => image.to_csv(),
            ExportFormat::Json => image.to_json(),
        }
    }
}

pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/pictures/first", get(first_picture))
        .route("/api/pictures/last", get(last_picture))
        .route("/api/pictures/{name}", get(get_picture))
        .route("/api/pictures/{name}/next", get(next_picture))
        .route("/api/pictures/{name}/prev", get(prev_picture))
        .route("/api/pictures/{name}/image", get(picture_image))
        .route("/api/pictures/{name}/annotations", get(picture_annotations))
        .route("/api/search", get(search))
        .route("/api/annotations", post(attach))
        .route("/api/annotations/{picture}/{synset}", delete(detach))
        .route("/api/export", get(export))
        .route("/api/stats", get(stats))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Runs blocking store or lexicon work off the async executor.
async fn blocking<T, F>(work: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn first_picture(State(state): State<AppState>) -> Result<Json<PictureDescriptor>, ApiError> {
    let picture = state.catalog.first()?;
    Ok(Json(PictureDescriptor::new(picture, &state.catalog)))
}

async fn last_picture(State(state): State<AppState>) -> Result<Json<PictureDescriptor>, ApiError> {
    let picture = state.catalog.last()?;
    Ok(Json(PictureDescriptor::new(picture, &state.catalog)))
}

async fn get_picture(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Json<PictureDescriptor>, ApiError> {
    let picture = state.catalog.find(&name)?;
    Ok(Json(PictureDescriptor::new(picture, &state.catalog)))
}

async fn next_picture(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Json<PictureDescriptor>, ApiError> {
    let current = state.catalog.find(&name)?;
    let picture = state.catalog.next(current)?;
    Ok(Json(PictureDescriptor::new(picture, &state.catalog)))
}

async fn prev_picture(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Json<PictureDescriptor>, ApiError> {
    let current = state.catalog.find(&name)?;
    let picture = state.catalog.prev(current)?;
    Ok(Json(PictureDescriptor::new(picture, &state.catalog)))
}

fn image_content_type(name: &str) -> &'static str {
    let ext = name.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("bmp") => "image/bmp",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("gif") => "image/gif",
        Some("tif" | "tiff") => "image/tiff",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}

async fn picture_image(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Response, ApiError> {
    let picture = state.catalog.find(&name)?;
    let path = state
        .catalog
        .image_path(picture)
        .ok_or_else(|| ApiError::image_unavailable(&name))?
        .to_path_buf();
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|_| ApiError::image_unavailable(&name))?;
    Ok(([(header::CONTENT_TYPE, image_content_type(&name))], bytes).into_response())
}

async fn picture_annotations(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Json<AnnotationListing>, ApiError> {
    blocking(move || Ok(state.store.list_for_picture(&state.lexicon, &name)?))
        .await
        .map(Json)
}

async fn search(
    State(state): State<AppState>,
    Query(params): Query<SearchParams>,
) -> Result<Json<SearchResultPage>, ApiError> {
    let query = params.q.unwrap_or_default();
    blocking(move || Ok(state.lexicon.search(&query, state.search_limit)?))
        .await
        .map(Json)
}

async fn attach(
    State(state): State<AppState>,
    body: Result<Json<AttachRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Annotation>), ApiError> {
    let Json(request) = body.map_err(|e| ApiError::invalid_body(e.body_text()))?;
    let synset: SynsetId = request.synset.parse()?;
    let annotation = blocking(move || {
        Ok(state
            .store
            .attach(&state.catalog, &state.lexicon, &request.picture, synset)?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(annotation)))
}

async fn detach(
    State(state): State<AppState>,
    Path((picture, synset)): Path<(String, String)>,
) -> Result<Json<DetachConfirmation>, ApiError> {
    let synset_id: SynsetId = synset.parse()?;
    blocking(move || {
        state.store.detach(&picture, synset_id)?;
        Ok(DetachConfirmation {
            picture_name: picture,
            synset_id,
            deleted: true,
        })
    })
    .await
    .map(Json)
}

async fn export(
    State(state): State<AppState>,
    Query(params): Query<ExportParams>,
) -> Result<Response, ApiError> {
    let requested = params.format.unwrap_or_else(|| "sql".to_string());
    let format = ExportFormat::parse(&requested).ok_or_else(|| ApiError::unknown_format(&requested))?;
    let body = blocking(move || {
        let image = StoreImage::capture(&state.store, &state.lexicon)?;
        Ok(format.render(&image))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], body).into_response())
}

async fn stats(State(state): State<AppState>) -> Result<Json<StoreStats>, ApiError> {
    blocking(move || Ok(state.store.stats()?)).await.map(Json)
}
