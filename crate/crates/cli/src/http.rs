//! JSON HTTP API over one immutable [`Engine`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::error;
use matrisk_core::explain::{render_structured, ExplanationType};
use serde_json::{json, Value};

use crate::engine::Engine;
use crate::error::{CliError, FieldError, InputError, InputErrorKind};
use crate::patient::parse_patient;

type Shared = Arc<Engine>;

struct ApiError {
    status: StatusCode,
    message: String,
    fields: Vec<FieldError>,
}

impl ApiError {
    fn bad_request(field: &str, message: impl Into<String>) -> Self {
        InputError::single(field, message).into()
    }
}

impl From<InputError> for ApiError {
    fn from(e: InputError) -> Self {
        let (status, message) = match e.kind {
            InputErrorKind::Invalid => (StatusCode::BAD_REQUEST, "invalid request"),
            InputErrorKind::OutOfRange => (StatusCode::UNPROCESSABLE_ENTITY, "clinical value out of range"),
        };
        Self {
            status,
            message: message.to_string(),
            fields: e.fields,
        }
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        match e {
            CliError::Input(i) => i.into(),
            other => {
                error!("request failed: {other}");
                Self {
                    status: StatusCode::INTERNAL_SERVER_ERROR,
                    message: "internal error".to_string(),
                    fields: Vec::new(),
                }
            }
        }
    }
}

fn reply(engine: &Engine, status: StatusCode, mut body: Value) -> Response {
    if let Some(obj) = body.as_object_mut() {
        obj.insert("model_version".into(), Value::String(engine.version.clone()));
    }
    (status, Json(body)).into_response()
}

fn failure(engine: &Engine, e: ApiError) -> Response {
    reply(engine, e.status, json!({ "error": e.message, "fields": e.fields }))
}

fn parse_body(body: &Bytes) -> Result<serde_json::Map<String, Value>, ApiError> {
    let v: Value = serde_json::from_slice(body).map_err(|e| ApiError::bad_request("body", format!("malformed JSON: {e}")))?;
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(ApiError::bad_request("body", "must be a JSON object")),
    }
}

fn predict_inner(engine: &Engine, body: &Bytes) -> Result<Value, ApiError> {
    let req = parse_body(body)?;
    let kind = match req.get("explanation_type") {
        None | Some(Value::Null) => ExplanationType::A,
        Some(Value::String(s)) => s.parse().map_err(|m: String| ApiError::bad_request("explanation_type", m))?,
        Some(_) => return Err(ApiError::bad_request("explanation_type", "must be one of \"A\", \"B\", \"C\"")),
    };
    let patient = req.get("patient").ok_or_else(|| ApiError::bad_request("patient", "is required"))?;
    let record = parse_patient(patient, &engine.ranges, true, "patient.")?;
    let bundle = engine.explain(&record, kind)?;
    Ok(render_structured(&bundle))
}

async fn predict(State(engine): State<Shared>, body: Bytes) -> Response {
    match predict_inner(&engine, &body) {
        Ok(v) => reply(&engine, StatusCode::OK, v),
        Err(e) => failure(&engine, e),
    }
}

fn whatif_inner(engine: &Engine, body: &Bytes) -> Result<Value, ApiError> {
    let req = parse_body(body)?;
    let patient = req.get("patient").ok_or_else(|| ApiError::bad_request("patient", "is required"))?;
    let record = parse_patient(patient, &engine.ranges, true, "patient.")?;
    let overrides = match req.get("overrides") {
        Some(Value::Array(a)) if !a.is_empty() => a,
        Some(Value::Array(_)) => return Err(ApiError::bad_request("overrides", "must contain at least one scenario")),
        Some(_) => return Err(ApiError::bad_request("overrides", "must be an array of field-override objects")),
        None => return Err(ApiError::bad_request("overrides", "is required")),
    };
    let (baseline, scenarios) = engine.what_if(&record, overrides)?;
    Ok(json!({ "baseline": baseline, "scenarios": scenarios }))
}

async fn whatif(State(engine): State<Shared>, body: Bytes) -> Response {
    match whatif_inner(&engine, &body) {
        Ok(v) => reply(&engine, StatusCode::OK, v),
        Err(e) => failure(&engine, e),
    }
}

async fn importance(State(engine): State<Shared>) -> Response {
    match engine.importance() {
        Some(g) => reply(&engine, StatusCode::OK, json!({ "n_instances": g.n_instances, "features": g.features })),
        None => reply(
            &engine,
            StatusCode::NOT_FOUND,
            json!({ "error": "no training record next to the model file; retrain to compute importance", "fields": [] }),
        ),
    }
}

async fn meta(State(engine): State<Shared>) -> Response {
    reply(&engine, StatusCode::OK, engine.describe())
}

async fn healthz(State(engine): State<Shared>) -> Response {
    reply(&engine, StatusCode::OK, json!({ "status": "ok" }))
}

async fn not_found(State(engine): State<Shared>) -> Response {
    reply(&engine, StatusCode::NOT_FOUND, json!({ "error": "no such endpoint", "fields": [] }))
}

pub fn router(engine: Shared) -> Router {
    Router::new()
        .route("/api/v1/predict", post(predict))
        .route("/api/v1/whatif", post(whatif))
        .route("/api/v1/model/importance", get(importance))
        .route("/api/v1/model/meta", get(meta))
        .route("/healthz", get(healthz))
        .fallback(not_found)
        .with_state(engine)
}

/// Serves until Ctrl-C or SIGTERM, then drains in-flight requests.
pub async fn serve(engine: Engine, bind: &str) -> Result<(), CliError> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| CliError::Config(format!("cannot bind {bind}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| CliError::Internal(e.to_string()))?;
    log::info!("serving model {} on http://{addr}", engine.version);
    axum::serve(listener, router(Arc::new(engine)))
        .with_graceful_shutdown(shutdown_signal())
        .await
        .map_err(|e| CliError::Internal(e.to_string()))
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    log::info!("shutting down");
}
