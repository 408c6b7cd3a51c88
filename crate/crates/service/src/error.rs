use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;

/// Why a review action was rejected. Nothing is logged for these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("invalid action: {0}")]
    Invalid(String),
    #[error("invalid span: {0}")]
    InvalidSpan(String),
    #[error("unknown target {0}")]
    UnknownTarget(String),
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("document {0} not found")]
    NotFound(String),
    #[error("document {0} has not been analysed")]
    NotAnalyzed(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("no models loaded")]
    ModelUnavailable,
    #[error("integrity check failed for {document}: {reason}")]
    Integrity { document: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ServiceError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ServiceError::Io { path: path.into(), source }
    }

    pub fn integrity(document: &str, reason: impl Into<String>) -> Self {
        ServiceError::Integrity { document: document.to_string(), reason: reason.into() }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::NotAnalyzed(_) | ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Action(ActionError::Invalid(_)) => StatusCode::BAD_REQUEST,
            ServiceError::Action(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::ModelUnavailable => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Integrity { .. } | ServiceError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::NotAnalyzed(_) => "not_analyzed",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::Action(ActionError::Invalid(_)) => "invalid_action",
            ServiceError::Action(ActionError::InvalidSpan(_)) => "invalid_span",
            ServiceError::Action(ActionError::UnknownTarget(_)) => "invalid_target",
            ServiceError::ModelUnavailable => "model_unavailable",
            ServiceError::Integrity { .. } => "integrity",
            ServiceError::Io { .. } => "io",
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}
