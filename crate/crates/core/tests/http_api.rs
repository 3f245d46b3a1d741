mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use brain_core::pipeline::Fixtures;
use brain_core::server::{router, AppState};
use common::*;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(Fixtures::load(fixtures()).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(v) => request
            .header("content-type", "application/json")
            .body(Body::from(v.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn bound_session(app: &Router) -> String {
    let (status, created) = call(app, "POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap().to_string();
    let base = format!("/sessions/{id}");
    let (status, _) = call(app, "POST", &format!("{base}/select"), Some(json!({"goalIds": ["TaxPayment"]}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(app, "POST", &format!("{base}/synthesize"), None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, body) = call(app, "POST", &format!("{base}/constraints"), Some(json!({"ruleIds": ["R2"]}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["bpel"], fixture("golden/taxpayment.abstract.bpel.xml"));
    let (status, body) = call(app, "POST", &format!("{base}/bind"), Some(json!({}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["stage"], "instance");
    assert_eq!(body["bpel"], fixture("golden/taxpayment.bound.bpel.xml"));
    id
}

#[tokio::test]
async fn full_walkthrough() {
    let app = app();
    let (status, goals) = call(&app, "GET", "/goals", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(goals["root"]["id"], "TaxPayment");
    let (_, rules) = call(&app, "GET", "/rules?kind=constraint", None).await;
    assert_eq!(rules.as_array().unwrap().len(), 1);

    let id = bound_session(&app).await;
    let (status, proposals) = call(&app, "GET", &format!("/sessions/{id}/providers/FinancialInstitutionPL"), None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = proposals["providers"].as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["FI-Alpha", "FI-Beta"]);

    let env = json!({"citizen.accountBalance": 500});
    let (status, report) = call(&app, "POST", &format!("/sessions/{id}/simulate"), Some(json!({"env": env, "seed": 0}))).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["status"], "completed");
    assert_eq!(report["conformant"], true);
    assert_eq!(report["trace"], fixture("golden/taxpayment.completed.trace"));

    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/bind"), Some(json!({"FinancialInstitutionPL": "FI-Beta"}))).await;
    assert_eq!(status, StatusCode::OK);
    let alpha = fixture("golden/taxpayment.bound.bpel.xml");
    assert_eq!(line_diff(&alpha, body["bpel"].as_str().unwrap()), 1);
}

#[tokio::test]
async fn same_seed_same_trace() {
    let app = app();
    let id = bound_session(&app).await;
    let body = json!({"env": {"citizen.accountBalance": 50}, "seed": 7});
    let uri = format!("/sessions/{id}/simulate");
    let (_, first) = call(&app, "POST", &uri, Some(body.clone())).await;
    let (_, second) = call(&app, "POST", &uri, Some(body)).await;
    assert_eq!(first["status"], "faulted");
    assert_eq!(first, second);
}

#[tokio::test]
async fn steps_out_of_order_conflict() {
    let app = app();
    let (_, created) = call(&app, "POST", "/sessions", None).await;
    let id = created["id"].as_str().unwrap();
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/bind"), Some(json!({}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "StageOrder");
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/synthesize"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn errors_carry_names() {
    let app = app();
    let (status, body) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownSession");

    let id = bound_session(&app).await;
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/providers/NoSuchPL"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownPartnerLink");

    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/bind"), Some(json!({"FinancialInstitutionPL": "FI-Gamma"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "FamilyMismatch");

    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/constraints"), Some(json!({"ruleIds": ["R1"]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "InvalidRule");

    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/select"), Some(json!({"goals": 3}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "BadRequest");
}

#[tokio::test]
async fn rules_can_be_added() {
    let app = app();
    let xml = r#"<rule id="R9" kind="behavior"><precedence antecedent="SendBill" consequent="TaxPaymentRequest"/></rule>"#;
    let request = Request::builder().method("POST").uri("/rules").body(Body::from(xml)).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::CREATED);

    // The new rule closes a cycle with the goal ordering.
    let (_, created) = call(&app, "POST", "/sessions", None).await;
    let id = created["id"].as_str().unwrap();
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/select"), Some(json!({"goalIds": ["TaxPayment"]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "CyclicRules");
}
