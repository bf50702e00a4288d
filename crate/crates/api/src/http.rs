//! axum routes over [`Pkg`]. Store work runs on the blocking pool.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use pkg_core::connector::StatementPattern;
use pkg_core::vocab::{AccessPolicy, Iri};

use crate::service::{element_param, Access, AliasEntry, ApiError, Pkg, StatementDraft};

type AppState = Arc<Pkg>;
type ApiResult<T> = Result<T, ApiError>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let mut resp = (status, Json(self.body())).into_response();
        if self.status == 401 {
            resp.headers_mut().insert(header::WWW_AUTHENTICATE, "Bearer".parse().expect("static header"));
        }
        resp
    }
}

pub fn router(pkg: Arc<Pkg>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/admin/owners", post(register_owner))
        .route("/admin/services", post(register_service))
        .route("/pkg/:owner/nl", post(natural_language))
        .route("/pkg/:owner/statements", post(add_statement).get(find_statements))
        .route("/pkg/:owner/statements/:id", get(get_statement).delete(delete_statement))
        .route("/pkg/:owner/statements/:id/access", put(set_access))
        .route("/pkg/:owner/preferences", get(preferences))
        .route("/pkg/:owner/graph", get(graph))
        .route("/pkg/:owner/export", get(export))
        .route("/pkg/:owner/aliases", get(aliases).post(add_alias))
        .with_state(pkg)
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    let (scheme, token) = value.trim().split_once(' ')?;
    scheme.eq_ignore_ascii_case("bearer").then(|| token.trim().to_string())
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::new(500, format!("worker failed: {e}")))?
}

/// Authenticate and authorize, then run `f` on the blocking pool.
async fn with_access<T: Send + 'static>(
    pkg: AppState,
    headers: &HeaderMap,
    owner: String,
    f: impl FnOnce(&Pkg, &Access) -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    let token = bearer(headers);
    blocking(move || {
        let agent = pkg.authenticate(token.as_deref())?;
        let acc = pkg.access(&agent, &owner)?;
        f(&pkg, &acc)
    })
    .await
}

#[derive(Deserialize)]
struct OwnerRequest {
    name: String,
}

async fn register_owner(
    State(pkg): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<OwnerRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    pkg.check_admin(bearer(&headers).as_deref())?;
    let req = body(payload)?;
    let name = req.name.clone();
    let (owner, token) = blocking(move || pkg.register_owner(&req.name)).await?;
    let reply = json!({ "name": name, "agent": owner.agent, "graph": owner.graph, "token": token });
    Ok((StatusCode::CREATED, Json(reply)))
}

#[derive(Deserialize)]
struct ServiceRequest {
    id: Iri,
    #[serde(default)]
    owners: BTreeSet<String>,
}

async fn register_service(
    State(pkg): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<ServiceRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    pkg.check_admin(bearer(&headers).as_deref())?;
    let req = body(payload)?;
    let (id, owners) = (req.id.clone(), req.owners.clone());
    let token = blocking(move || pkg.register_service(req.id, req.owners)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "owners": owners, "token": token }))))
}

#[derive(Deserialize)]
struct NlRequest {
    statement: String,
}

async fn natural_language(
    State(pkg): State<AppState>,
    Path(owner): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<NlRequest>, JsonRejection>,
) -> ApiResult<Response> {
    // Authentication comes before body validation: no token, no hints.
    let token = bearer(&headers);
    let agent = pkg.authenticate(token.as_deref())?;
    let req = body(payload)?;
    blocking(move || {
        let acc = pkg.access(&agent, &owner)?;
        pkg.natural_language(&acc, &req.statement)
    })
    .await
    .map(|r| Json(r).into_response())
}

async fn add_statement(
    State(pkg): State<AppState>,
    Path(owner): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<StatementDraft>, JsonRejection>,
) -> ApiResult<Response> {
    pkg.authenticate(bearer(&headers).as_deref())?;
    let draft = body(payload)?;
    let result = with_access(pkg, &headers, owner, move |pkg, acc| pkg.add_statement(acc, draft)).await?;
    Ok((StatusCode::CREATED, Json(result)).into_response())
}

#[derive(Deserialize)]
struct SpoQuery {
    s: Option<String>,
    p: Option<String>,
    o: Option<String>,
}

async fn find_statements(
    State(pkg): State<AppState>,
    Path(owner): Path<String>,
    Query(q): Query<SpoQuery>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    pkg.authenticate(bearer(&headers).as_deref())?;
    let pattern = StatementPattern {
        subject: element_param(q.s.as_deref())?,
        predicate: element_param(q.p.as_deref())?,
        object: element_param(q.o.as_deref())?,
    };
    let found = with_access(pkg, &headers, owner, move |pkg, acc| pkg.find_statements(acc, pattern)).await?;
    Ok(Json(found).into_response())
}

async fn get_statement(
    State(pkg): State<AppState>,
    Path((owner, id)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let stmt = with_access(pkg, &headers, owner, move |pkg, acc| pkg.get_statement(acc, &id)).await?;
    Ok(Json(stmt).into_response())
}

async fn delete_statement(
    State(pkg): State<AppState>,
    Path((owner, id)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let result = with_access(pkg, &headers, owner, move |pkg, acc| pkg.delete_statement(acc, &id)).await?;
    Ok(Json(result).into_response())
}

async fn set_access(
    State(pkg): State<AppState>,
    Path((owner, id)): Path<(String, String)>,
    headers: HeaderMap,
    payload: Result<Json<AccessPolicy>, JsonRejection>,
) -> ApiResult<Response> {
    pkg.authenticate(bearer(&headers).as_deref())?;
    let policy = body(payload)?;
    let stmt = with_access(pkg, &headers, owner, move |pkg, acc| pkg.set_access(acc, &id, policy)).await?;
    Ok(Json(stmt).into_response())
}

#[derive(Deserialize)]
struct TopicQuery {
    topic: Option<String>,
}

async fn preferences(
    State(pkg): State<AppState>,
    Path(owner): Path<String>,
    Query(q): Query<TopicQuery>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let prefs = with_access(pkg, &headers, owner, move |pkg, acc| pkg.preferences(acc, q.topic.as_deref())).await?;
    Ok(Json(prefs).into_response())
}

async fn graph(State(pkg): State<AppState>, Path(owner): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let view = with_access(pkg, &headers, owner, |pkg, acc| pkg.graph(acc)).await?;
    Ok(Json(view).into_response())
}

async fn export(State(pkg): State<AppState>, Path(owner): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let text = with_access(pkg, &headers, owner, |pkg, acc| pkg.export(acc)).await?;
    Ok(([(header::CONTENT_TYPE, "text/turtle; charset=utf-8")], text).into_response())
}

async fn aliases(State(pkg): State<AppState>, Path(owner): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let list = with_access(pkg, &headers, owner, |pkg, acc| pkg.aliases(acc)).await?;
    Ok(Json(list).into_response())
}

async fn add_alias(
    State(pkg): State<AppState>,
    Path(owner): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<AliasEntry>, JsonRejection>,
) -> ApiResult<Response> {
    pkg.authenticate(bearer(&headers).as_deref())?;
    let entry = body(payload)?;
    let added = with_access(pkg, &headers, owner, move |pkg, acc| pkg.add_alias(acc, &entry)).await?;
    let status = if added { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(json!({ "added": added }))).into_response())
}
