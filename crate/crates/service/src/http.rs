//! JSON-over-HTTP routes.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use crate::error::ServiceError;
use crate::review::Role;
use crate::store::{ActionRequest, Ingested, Store};

/// Stub identity: the role used when a request body names no actor.
pub const ROLE_HEADER: &str = "x-soaguard-role";

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/documents", post(ingest).get(list))
        .route("/documents/{id}/analyze", post(analyze))
        .route("/documents/{id}/assessment", get(assessment))
        .route("/documents/{id}/actions", post(apply_action))
        .route("/documents/{id}/audit-log", get(audit_log))
        .route("/reports/batch.csv", get(batch_csv))
        .with_state(store)
}

type ApiResult = Result<Response, ServiceError>;

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.expect("blocking task panicked")
}

async fn ingest(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult {
    let (id, ingested) = blocking(move || store.ingest_bytes(&body)).await?;
    let status = match ingested {
        Ingested::Created => StatusCode::CREATED,
        Ingested::Unchanged => StatusCode::OK,
    };
    Ok((status, Json(serde_json::json!({ "document_id": id }))).into_response())
}

#[derive(Deserialize)]
struct ListQuery {
    sort: Option<String>,
}

async fn list(State(store): State<Arc<Store>>, Query(q): Query<ListQuery>) -> ApiResult {
    let by_risk = match q.sort.as_deref() {
        None | Some("id") => false,
        Some("risk") => true,
        Some(other) => return Err(ServiceError::BadRequest(format!("unknown sort {other:?}; use risk or id"))),
    };
    Ok(Json(store.list(by_risk)).into_response())
}

async fn analyze(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    let view = blocking(move || store.analyze(&id)).await?;
    Ok(Json(view).into_response())
}

async fn assessment(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    Ok(Json(store.assessment(&id)?).into_response())
}

fn header_role(headers: &HeaderMap) -> Result<Option<Role>, ServiceError> {
    let Some(value) = headers.get(ROLE_HEADER) else { return Ok(None) };
    match value.to_str().map(str::trim) {
        Ok("auditor") => Ok(Some(Role::Auditor)),
        Ok("advisor") => Ok(Some(Role::Advisor)),
        _ => Err(ServiceError::BadRequest(format!("{ROLE_HEADER} must be auditor or advisor"))),
    }
}

async fn apply_action(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let mut request: ActionRequest =
        serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(format!("invalid action request: {e}")))?;
    if request.actor.is_none() {
        request.actor = header_role(&headers)?;
    }
    let outcome = blocking(move || store.apply(&id, request)).await?;
    let status = if outcome.duplicate { StatusCode::OK } else { StatusCode::CREATED };
    Ok((status, Json(outcome)).into_response())
}

async fn audit_log(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult {
    Ok(Json(store.audit_log(&id)?).into_response())
}

async fn batch_csv(State(store): State<Arc<Store>>) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], store.batch_csv()).into_response()
}

/// Serves until the process is stopped.
pub async fn serve(store: Arc<Store>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}
