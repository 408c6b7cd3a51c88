mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use soaguard_core::document::serialize_document;
use soaguard_service::http::{router, ROLE_HEADER};
use soaguard_service::Store;

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(uri).header(header::CONTENT_TYPE, "application/json");
    let req = builder.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let (status, bytes) = send(app, req).await;
    (status, if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() })
}

async fn post_raw(app: &Router, uri: &str, body: String) -> (StatusCode, Value) {
    let (status, bytes) = send(app, Request::post(uri).body(Body::from(body)).unwrap()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn review_workflow_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(Store::open(dir.path(), Some(common::analyzer())).unwrap()));
    let docs = common::documents(3, 41);

    let (status, body) = post_raw(&app, "/documents", serialize_document(&docs[0])).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["document_id"], docs[0].id.as_str());
    assert_eq!(post_raw(&app, "/documents", serialize_document(&docs[0])).await.0, StatusCode::OK);
    let mut changed = docs[0].clone();
    changed.title = "Changed".into();
    assert_eq!(post_raw(&app, "/documents", serialize_document(&changed)).await.0, StatusCode::CONFLICT);
    let (status, body) = post_raw(&app, "/documents", "{broken".into()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "bad_request");

    let id = docs[0].id.as_str();
    assert_eq!(call(&app, "GET", &format!("/documents/{id}/assessment"), None).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", "/documents/nope/analyze", None).await.0, StatusCode::NOT_FOUND);
    let (status, view) = call(&app, "POST", &format!("/documents/{id}/analyze"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["assessment"]["kri_results"].as_array().unwrap().len(), 6);
    assert!(view["elapsed_ms"].as_f64().unwrap() >= 0.0);
    let (status, again) = call(&app, "GET", &format!("/documents/{id}/assessment"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again["assessment"], view["assessment"]);

    let actions = format!("/documents/{id}/actions");
    let comment = json!({
        "action": {"kind": "add_comment", "kri": "insurance", "text": "Checked with the client."},
        "idempotency_key": "c-1",
        "expected_sequence": 0
    });
    let req = Request::post(&actions)
        .header(ROLE_HEADER, "advisor")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(comment.to_string()))
        .unwrap();
    let (status, bytes) = send(&app, req).await;
    assert_eq!(status, StatusCode::CREATED);
    let out: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(out["event"]["sequence"], 1);
    assert_eq!(out["event"]["actor"], "advisor");
    assert_eq!(out["state"]["comments"]["insurance"].as_array().unwrap().len(), 1);

    let mut with_actor = comment.clone();
    with_actor["actor"] = json!("advisor");
    let (status, dup) = call(&app, "POST", &actions, Some(with_actor)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(dup["duplicate"], true);
    assert_eq!(dup["event"], out["event"]);

    let no_actor = json!({"action": {"kind": "add_comment", "text": "x"}, "idempotency_key": "c-2"});
    assert_eq!(call(&app, "POST", &actions, Some(no_actor)).await.0, StatusCode::BAD_REQUEST);
    let stale = json!({"action": {"kind": "add_comment", "text": "x"}, "actor": "auditor",
        "idempotency_key": "c-3", "expected_sequence": 0});
    assert_eq!(call(&app, "POST", &actions, Some(stale)).await.0, StatusCode::CONFLICT);
    let missing =
        json!({"action": {"kind": "delete_goal", "goal_id": "none"}, "actor": "auditor", "idempotency_key": "d-1"});
    let (status, body) = call(&app, "POST", &actions, Some(missing)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "invalid_target");
    let bad_span = json!({"action": {"kind": "add_goal", "span": {"unit_id": format!("{id}:s0:b0:u0"), "start": 0, "end": 100000}},
        "actor": "auditor", "idempotency_key": "g-1"});
    let (status, body) = call(&app, "POST", &actions, Some(bad_span)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "invalid_span");
    let unknown_kind = json!({"action": {"kind": "rewrite"}, "actor": "auditor", "idempotency_key": "x"});
    assert_eq!(call(&app, "POST", &actions, Some(unknown_kind)).await.0, StatusCode::BAD_REQUEST);

    let (status, log) = call(&app, "GET", &format!("/documents/{id}/audit-log"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(log.as_array().unwrap().len(), 1);
    assert_eq!(log[0]["action"]["kind"], "add_comment");

    for d in &docs[1..] {
        assert_eq!(post_raw(&app, "/documents", serialize_document(d)).await.0, StatusCode::CREATED);
    }
    call(&app, "POST", &format!("/documents/{}/analyze", docs[1].id), None).await;
    let (_, listing) = call(&app, "GET", "/documents?sort=risk", None).await;
    let listing = listing.as_array().unwrap().clone();
    assert_eq!(listing.len(), 3);
    assert_eq!(listing[2]["analyzed"], false);
    assert_eq!(listing[2]["document_id"], docs[2].id.as_str());
    assert_eq!(call(&app, "GET", "/documents?sort=sideways", None).await.0, StatusCode::BAD_REQUEST);

    let res = app.clone().oneshot(Request::get("/reports/batch.csv").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert!(res.headers()[header::CONTENT_TYPE].to_str().unwrap().starts_with("text/csv"));
    let csv = String::from_utf8(res.into_body().collect().await.unwrap().to_bytes().to_vec()).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "document_id,overall,goal_advice,diversification,client_position,cashflow,starting_balance,insurance"
    );
    assert_eq!(lines.len(), 3);
    let ranked: Vec<&str> = listing[..2].iter().map(|s| s["document_id"].as_str().unwrap()).collect();
    let rows: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(rows, ranked);
}

#[tokio::test]
async fn analysis_without_models_is_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(Store::open(dir.path(), None).unwrap()));
    let doc = common::documents(1, 2).remove(0);
    assert_eq!(post_raw(&app, "/documents", serialize_document(&doc)).await.0, StatusCode::CREATED);
    let (status, body) = call(&app, "POST", &format!("/documents/{}/analyze", doc.id), None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["error"], "model_unavailable");
    assert_eq!(call(&app, "GET", "/documents/missing/audit-log", None).await.0, StatusCode::NOT_FOUND);
}
