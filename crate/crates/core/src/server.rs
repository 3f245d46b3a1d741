//! HTTP/JSON API over designer sessions.
//!
//! Error responses carry `{"error": <name>, "message": <text>}` where the
//! name is the library's domain error name. Unknown sessions and resources
//! answer 404, steps out of order 409, domain errors 422 and malformed
//! request bodies 400.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bpel::serialize_bpel;
use crate::error::Error;
use crate::goals::GoalModel;
use crate::pipeline::Fixtures;
use crate::registry::SharedRegistry;
use crate::rules::{parse_rule, Env, RuleKind, SharedRuleRepository};
use crate::runtime::Mocks;
use crate::session::{Session, SessionError};

pub const DEFAULT_PORT: u16 = 8080;

/// Port from `BRAIN_PORT`, falling back to 8080.
pub fn port_from_env() -> u16 {
    std::env::var("BRAIN_PORT")
        .ok()
        .and_then(|p| p.parse().ok())
        .unwrap_or(DEFAULT_PORT)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    name: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, name: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            name: name.to_string(),
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.name(), e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Stage { .. } => ApiError::new(StatusCode::CONFLICT, "StageOrder", e.to_string()),
            SessionError::Domain(e) => e.into(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.name, "message": self.message}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Shared server state. Each session sits behind its own lock, so requests
/// on one session are serialized while sessions proceed independently.
#[derive(Clone)]
pub struct AppState {
    goals: Arc<GoalModel>,
    rules: SharedRuleRepository,
    registry: SharedRegistry,
    mocks: Arc<Mocks>,
    sessions: Arc<RwLock<BTreeMap<String, Arc<Mutex<Session>>>>>,
    next_id: Arc<AtomicU64>,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(fixtures: Fixtures) -> Self {
        AppState {
            goals: Arc::new(fixtures.goals),
            rules: SharedRuleRepository::new(fixtures.rules),
            registry: SharedRegistry::new(fixtures.registry),
            mocks: Arc::new(fixtures.mocks),
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
            snapshot_dir: None,
        }
    }

    /// Writes `<dir>/<session-id>.json` after every session change.
    pub fn with_snapshots(mut self, dir: impl Into<PathBuf>) -> Self {
        self.snapshot_dir = Some(dir.into());
        self
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session table lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownSession", format!("no session `{id}`")))
    }

    /// Runs `f` on the session under its lock and snapshots the result.
    fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> ApiResult<T>) -> ApiResult<T> {
        let session = self.session(id)?;
        let mut guard = session.lock().expect("session lock poisoned");
        let out = f(&mut guard)?;
        if let Some(dir) = &self.snapshot_dir {
            fs::create_dir_all(dir)
                .and_then(|_| fs::write(dir.join(format!("{}.json", guard.id)), guard.to_json()))
                .map_err(|e| ApiError::from(Error::from(e)))?;
        }
        Ok(out)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/goals", get(goals))
        .route("/rules", get(list_rules).post(add_rule))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(show_session))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/synthesize", post(synthesize))
        .route("/sessions/{id}/constraints", post(constraints))
        .route("/sessions/{id}/providers/{link}", get(providers))
        .route("/sessions/{id}/bind", post(bind))
        .route("/sessions/{id}/simulate", post(simulate))
        .with_state(state)
}

pub async fn serve(state: AppState, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router(state)).await
}

async fn goals(State(state): State<AppState>) -> Json<GoalModel> {
    Json((*state.goals).clone())
}

#[derive(Deserialize)]
struct RuleQuery {
    kind: Option<String>,
    task: Option<String>,
}

async fn list_rules(State(state): State<AppState>, Query(q): Query<RuleQuery>) -> ApiResult<Json<Value>> {
    let kind = q.kind.as_deref().filter(|k| !k.is_empty()).map(RuleKind::parse).transpose()?;
    let task = q.task.as_deref().filter(|t| !t.is_empty());
    Ok(Json(json!(state.rules.query_owned(kind, task))))
}

async fn add_rule(State(state): State<AppState>, body: String) -> ApiResult<(StatusCode, Json<Value>)> {
    let rule = parse_rule(&body)?;
    let id = rule.id().to_string();
    state.rules.put(rule)?;
    Ok((StatusCode::CREATED, Json(json!({"id": id}))))
}

async fn create_session(State(state): State<AppState>) -> ApiResult<(StatusCode, Json<Value>)> {
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::SeqCst));
    let session = Session::new(id.clone());
    let stage = session.stage;
    state
        .sessions
        .write()
        .expect("session table lock poisoned")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    state.with_session(&id, |_| Ok(()))?;
    Ok((StatusCode::CREATED, Json(json!({"id": id, "stage": stage}))))
}

async fn show_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    let session = state.session(&id)?;
    let guard = session.lock().expect("session lock poisoned");
    Ok(Json(guard.clone()))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SelectBody {
    goal_ids: Vec<String>,
}

async fn select(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SelectBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(body) = body?;
    let goals: Vec<&str> = body.goal_ids.iter().map(String::as_str).collect();
    state.with_session(&id, |s| {
        let analysis = state.rules.read(|repo| s.select(&state.goals, repo, &goals).cloned())?;
        Ok(Json(json!({
            "stage": s.stage,
            "tasks": analysis.selection.tasks,
            "implied": analysis.selection.implied,
            "rules": analysis.rules,
            "dependency": analysis.dependency,
            "levels": analysis.dependency.levels(),
        })))
    })
}

async fn synthesize(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    state.with_session(&id, |s| {
        let workflow = state.rules.read(|repo| s.synthesize(&state.goals, repo).cloned())?;
        Ok(Json(json!({
            "stage": s.stage,
            "workflow": workflow,
            "levels": s.analysis.as_ref().map(|a| a.dependency.levels()),
        })))
    })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ConstraintsBody {
    rule_ids: Vec<String>,
}

async fn constraints(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ConstraintsBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(body) = body?;
    let ids: Vec<&str> = body.rule_ids.iter().map(String::as_str).collect();
    state.with_session(&id, |s| {
        let (graph, process) = state.rules.read(|repo| {
            s.attach(&state.goals, repo, &ids)
                .map(|(g, p)| (g.clone(), serialize_bpel(p)))
        })?;
        Ok(Json(json!({"stage": s.stage, "graph": graph, "bpel": process})))
    })
}

async fn providers(
    State(state): State<AppState>,
    Path((id, link)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    state.with_session(&id, |s| {
        let family = s
            .abstract_process
            .as_ref()
            .and_then(|p| p.partner_link(&link))
            .map(|l| l.family.clone());
        let proposals = state.rules.read(|repo| {
            state.registry.read(|registry| {
                s.proposals(&link, repo, registry)
                    .map(|ps| ps.into_iter().cloned().collect::<Vec<_>>())
            })
        });
        let proposals = match proposals {
            Err(SessionError::Domain(Error::UnknownPartnerLink(link))) => {
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    "UnknownPartnerLink",
                    format!("unknown partner link `{link}`"),
                ))
            }
            other => other?,
        };
        Ok(Json(json!({"link": link, "family": family, "providers": proposals})))
    })
}

async fn bind(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<BTreeMap<String, String>>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(bindings) = body?;
    state.with_session(&id, |s| {
        let xml = state.rules.read(|repo| {
            state
                .registry
                .read(|registry| s.bind(&bindings, repo, registry).map(serialize_bpel))
        })?;
        Ok(Json(json!({"stage": s.stage, "bpel": xml})))
    })
}

#[derive(Deserialize)]
struct SimulateBody {
    #[serde(default)]
    env: Env,
    #[serde(default)]
    seed: u64,
}

async fn simulate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SimulateBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(body) = body?;
    state.with_session(&id, |s| {
        let report = s.simulate(&state.mocks, &body.env, body.seed)?;
        Ok(Json(json!({
            "status": report.trace.status,
            "trace": report.trace.to_text(),
            "events": report.trace.events,
            "violations": report.violations,
            "conformant": report.conformant(),
        })))
    })
}
