//! Annotation service: HTTP API and startup plumbing around `gwat-core`.

pub mod api;
pub mod config;
pub mod error;

pub use api::{router, AppState};
pub use config::{PictureSource, ServiceConfig};
pub use error::ApiError;

use std::sync::Arc;

use gwat_core::catalog::{Catalog, CatalogError};
use gwat_core::lexicon::{Lexicon, LexiconError, LoadReport};
use gwat_core::store::{AnnotationStore, StoreError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub fn load_catalog(source: &PictureSource) -> Result<Catalog, CatalogError> {
    match source {
        PictureSource::Directory(root) => Catalog::from_directory(root),
        PictureSource::Manifest(path) => Catalog::from_manifest_file(path),
    }
}

pub fn load_lexicon(dict_dir: &std::path::Path) -> Result<(Lexicon, LoadReport), LexiconError> {
    let started = std::time::Instant::now();
    let (lexicon, report) = Lexicon::load_with_report(dict_dir)?;
    let counts = lexicon.counts();
    tracing::info!(
        total = counts.total(),
        noun = counts.noun,
        verb = counts.verb,
        adjective = counts.adjective,
        adverb = counts.adverb,
        index_warnings = report.warnings.len(),
        elapsed_ms = started.elapsed().as_millis() as u64,
        "lexicon loaded"
    );
    Ok((lexicon, report))
}

/// Loads lexicon and catalog and opens the store.
pub fn build_state(config: &ServiceConfig) -> Result<AppState, StartupError> {
    let (lexicon, _) = load_lexicon(&config.dict_dir)?;
    let catalog = load_catalog(&config.pictures)?;
    tracing::info!(pictures = catalog.len(), images = catalog.has_images(), "catalog loaded");
    let store = AnnotationStore::open(&config.store_path)?;
    Ok(AppState {
        lexicon: Arc::new(lexicon),
        catalog: Arc::new(catalog),
        store: Arc::new(store),
        search_limit: config.search_limit,
    })
}
