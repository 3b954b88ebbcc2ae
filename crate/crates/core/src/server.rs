//! JSON-over-HTTP query service.
//!
//! Readers take a snapshot `Arc<Cube>` per request, so a rebuild that swaps the
//! cube mid-flight is never observed half-done. One rebuild runs at a time.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};
use tower_http::services::ServeDir;

use crate::cube::{pivot, Cube, CubeQuery, Filter, LevelRef, PivotGrid, QueryError, QueryResult};
use crate::value::Value;

/// Produces a fresh cube, typically by re-running the pipeline.
pub type Rebuilder = Arc<dyn Fn() -> Result<Cube, String> + Send + Sync>;

pub struct AppState {
    cube: RwLock<Arc<Cube>>,
    rebuilding: tokio::sync::Mutex<()>,
    rebuilder: Option<Rebuilder>,
}

impl AppState {
    pub fn new(cube: Cube, rebuilder: Option<Rebuilder>) -> Arc<AppState> {
        Arc::new(AppState { cube: RwLock::new(Arc::new(cube)), rebuilding: tokio::sync::Mutex::new(()), rebuilder })
    }

    pub fn cube(&self) -> Arc<Cube> {
        self.cube.read().expect("cube lock").clone()
    }

    fn swap(&self, cube: Cube) {
        *self.cube.write().expect("cube lock") = Arc::new(cube);
    }
}

/// Error body: `{code, message, detail}`. Codes are part of the wire contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    pub detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>, detail: impl Into<String>) -> Self {
        ApiError { status: status.as_u16(), code: code.into(), message: message.into(), detail: detail.into() }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let message = e.to_string();
        let bad = StatusCode::BAD_REQUEST;
        match e {
            QueryError::UnknownDimension(d) => ApiError::new(bad, "unknown_dimension", message, d),
            QueryError::UnknownLevel { dimension, level } => {
                ApiError::new(bad, "unknown_level", message, format!("{dimension}.{level}"))
            }
            QueryError::UnknownMember { member, .. } => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_member", message, member)
            }
            QueryError::UnknownMeasure(m) => ApiError::new(bad, "unknown_measure", message, m),
            QueryError::DuplicateDimension(d) => ApiError::new(bad, "duplicate_dimension", message, d),
            QueryError::EmptyFilter { dimension, level } => {
                ApiError::new(bad, "empty_filter", message, format!("{dimension}.{level}"))
            }
            QueryError::AtTopLevel(d) => ApiError::new(bad, "at_top_level", message, d),
            QueryError::AtBottomLevel(d) => ApiError::new(bad, "at_bottom_level", message, d),
            QueryError::AxisMismatch(d) => ApiError::new(bad, "axis_mismatch", message, d),
            QueryError::Overflow(m) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "overflow", message, m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupByRequest {
    pub dim: String,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterRequest {
    pub dim: String,
    pub level: String,
    /// Display strings; `null` is the Unknown member.
    pub members: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PivotRequest {
    #[serde(default)]
    pub rows: Vec<String>,
    #[serde(default)]
    pub cols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    #[serde(default)]
    pub group_by: Vec<GroupByRequest>,
    #[serde(default)]
    pub filters: Vec<FilterRequest>,
    #[serde(default)]
    pub measures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<PivotRequest>,
}

impl QueryRequest {
    pub fn to_cube_query(&self) -> CubeQuery {
        CubeQuery {
            group_by: self.group_by.iter().map(|g| LevelRef::new(&g.dim, &g.level)).collect(),
            filters: self
                .filters
                .iter()
                .map(|f| {
                    Filter::new(
                        &f.dim,
                        &f.level,
                        f.members.iter().map(|m| m.as_deref().map_or(Value::Null, Value::from)),
                    )
                })
                .collect(),
            measures: self.measures.clone(),
        }
    }

    /// Runs the request against a cube, producing the response body.
    pub fn execute(&self, cube: &Cube) -> Result<JsonValue, ApiError> {
        let result = cube.query(&self.to_cube_query())?;
        let mut body = json!({
            "group_by": result.group_by.iter().map(|g| json!({"dim": g.dimension, "level": g.level})).collect::<Vec<_>>(),
            "measures": result.measures.iter().map(|m| m.name.clone()).collect::<Vec<_>>(),
        });
        match &self.pivot {
            None => body["rows"] = rows_json(&result),
            Some(p) => {
                let rows: Vec<&str> = p.rows.iter().map(String::as_str).collect();
                let cols: Vec<&str> = p.cols.iter().map(String::as_str).collect();
                body["grid"] = grid_json(&pivot(&result, &rows, &cols)?);
            }
        }
        Ok(body)
    }
}

/// `null` for NULL, the display string otherwise.
pub fn value_json(v: &Value) -> JsonValue {
    if v.is_null() {
        JsonValue::Null
    } else {
        JsonValue::String(v.to_string())
    }
}

fn values_json(vs: &[Value]) -> JsonValue {
    JsonValue::Array(vs.iter().map(value_json).collect())
}

fn rows_json(result: &QueryResult) -> JsonValue {
    JsonValue::Array(
        result
            .rows
            .iter()
            .map(|r| json!({"members": values_json(&r.members), "values": values_json(&r.values)}))
            .collect(),
    )
}

fn grid_json(g: &PivotGrid) -> JsonValue {
    json!({
        "row_dims": g.row_dims,
        "col_dims": g.col_dims,
        "measures": g.measures,
        "row_headers": g.row_headers.iter().map(|h| values_json(h)).collect::<Vec<_>>(),
        "col_headers": g.col_headers.iter().map(|h| values_json(h)).collect::<Vec<_>>(),
        "cells": g.cells.iter().map(|row| row.iter().map(|c| c.as_ref().map_or(JsonValue::Null, |v| values_json(v))).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "row_totals": g.row_totals.iter().map(|t| values_json(t)).collect::<Vec<_>>(),
        "col_totals": g.col_totals.iter().map(|t| values_json(t)).collect::<Vec<_>>(),
        "grand_total": values_json(&g.grand_total),
    })
}

/// Cube metadata: dimensions with their levels and member counts (Unknown
/// included), and measures.
pub fn meta_json(cube: &Cube) -> JsonValue {
    json!({
        "fact": cube.schema().fact.name,
        "dimensions": cube.dimensions().iter().map(|d| json!({
            "name": d.name(),
            "levels": d.level_names(),
            "member_counts": (0..d.level_count()).map(|l| d.members(l).len()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "measures": cube.measures().iter().map(|m| json!({"name": m.name, "agg": m.aggregation.to_string()})).collect::<Vec<_>>(),
    })
}

async fn meta(State(state): State<Arc<AppState>>) -> Json<JsonValue> {
    Json(meta_json(&state.cube()))
}

async fn query(
    State(state): State<Arc<AppState>>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Json<JsonValue>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text(), ""))?;
    let cube = state.cube();
    req.execute(&cube).map(Json)
}

async fn rebuild(State(state): State<Arc<AppState>>) -> Result<Json<JsonValue>, ApiError> {
    let Ok(_guard) = state.rebuilding.try_lock() else {
        return Err(ApiError::new(StatusCode::CONFLICT, "rebuild_in_progress", "a rebuild is already running", ""));
    };
    let Some(rebuilder) = state.rebuilder.clone() else {
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "rebuild_unavailable",
            "this server was started without a project to rebuild from",
            "",
        ));
    };
    let cube = tokio::task::spawn_blocking(move || rebuilder())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "rebuild_failed", e.to_string(), ""))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "rebuild_failed", e, ""))?;
    let fact_rows = cube.cells().len();
    state.swap(cube);
    Ok(Json(json!({"status": "rebuilt", "fact_rows": fact_rows})))
}

const PLACEHOLDER: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>starforge</title></head>\n<body><h1>starforge</h1><p>No UI assets configured. The query API is at <code>/api/meta</code> and <code>/api/query</code>.</p></body></html>\n";

pub fn router(state: Arc<AppState>, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/meta", get(meta))
        .route("/api/query", post(query))
        .route("/api/admin/rebuild", post(rebuild))
        .with_state(state);
    match assets {
        Some(dir) if dir.is_dir() => api.fallback_service(ServeDir::new(dir)),
        _ => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, app: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
