use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use gwat_core::catalog::CatalogError;
use gwat_core::export::ExportError;
use gwat_core::lexicon::LexiconError;
use gwat_core::store::StoreError;
use serde::Serialize;

/// Error body returned by every endpoint: `{"error_code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub error_code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error_code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, error_code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            error_code,
            message: message.into(),
        }
    }

    pub fn unknown_format(format: &str) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "unknown_format",
            format!("unknown export format {format:?}, expected sql, csv or json"),
        )
    }

    pub fn image_unavailable(name: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "image_unavailable",
            format!("no image file available for {name}"),
        )
    }

    pub fn invalid_body(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_body", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error_code: self.error_code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(err: CatalogError) -> Self {
        let status = match err {
            CatalogError::NotFound(_) | CatalogError::EmptyCatalog | CatalogError::StaleRef(_) => {
                StatusCode::NOT_FOUND
            }
            CatalogError::MissingRoot(_)
            | CatalogError::Io { .. }
            | CatalogError::DuplicateFilename(_)
            | CatalogError::UnknownCategoryPrefix(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

impl From<LexiconError> for ApiError {
    fn from(err: LexiconError) -> Self {
        let status = match err {
            LexiconError::NotFound(_) => StatusCode::NOT_FOUND,
            LexiconError::InvalidIdFormat(_) | LexiconError::EmptyQuery | LexiconError::InvalidLimit => {
                StatusCode::BAD_REQUEST
            }
            LexiconError::MissingFile(_) | LexiconError::Io { .. } | LexiconError::MalformedLine { .. } => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(err: StoreError) -> Self {
        let status = match err {
            StoreError::UnknownPicture(_) | StoreError::UnknownSynset(_) | StoreError::NotAttached { .. } => {
                StatusCode::NOT_FOUND
            }
            StoreError::AlreadyAttached { .. } => StatusCode::CONFLICT,
            StoreError::CorruptStore(_) | StoreError::IoFailure(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, err.code(), err.to_string())
    }
}

impl From<ExportError> for ApiError {
    fn from(err: ExportError) -> Self {
        match err {
            ExportError::Store(inner) => inner.into(),
            ExportError::DanglingSynsets(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, err.code(), err.to_string())
            }
        }
    }
}
