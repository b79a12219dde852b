//! HTTP surface: the chat webhook and the provider API.
//!
//! | Method | Path                              | Body / query                 |
//! |--------|-----------------------------------|------------------------------|
//! | POST   | `/webhook`                        | Telegram `Update`            |
//! | GET    | `/webhook/outbox?after=N`         | recorded `sendMessage` calls |
//! | GET    | `/api/patients`                   |                              |
//! | GET    | `/api/patients/{id}/report`       | `start`, `end` (RFC 3339)    |
//! | GET    | `/api/patients/{id}/timeline`     | `start`, `end`               |
//! | GET    | `/api/patients/{id}/thread`       |                              |
//! | POST   | `/api/patients/{id}/thread`       | `{"body": "..."}`            |
//! | GET    | `/api/alerts`                     | `patient_id`, `kind`, `open` |
//! | POST   | `/api/alerts/{id}/ack`            |                              |
//!
//! `/api` requires `Authorization: Bearer <auth_token>`. Errors are
//! `{"error": code, "message": text}`. Without `start`/`end` a window is the
//! seven days before now.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Duration;
use roberto_core::analytics::Window;
use roberto_core::domain::{AlertId, Instant, PatientId};
use roberto_store::StoreError;
use serde::Deserialize;
use serde_json::json;

use crate::outbound::Outbox;
use crate::provider::{self, AlertFilter};
use crate::{Gateway, GatewayError, IngestOutcome};

pub const WEBHOOK_SECRET_HEADER: &str = "x-telegram-bot-api-secret-token";

#[derive(Clone)]
pub struct AppState {
    pub gateway: Arc<Gateway>,
    /// Present when the webhook channel records instead of sending.
    pub outbox: Option<Arc<Outbox>>,
}

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            Self::MalformedPayload(_) => (StatusCode::BAD_REQUEST, "malformed_payload"),
            Self::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            Self::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized"),
            Self::UnknownPatient(_) => (StatusCode::NOT_FOUND, "unknown_patient"),
            Self::UnknownAlert(_) => (StatusCode::NOT_FOUND, "unknown_alert"),
            Self::ChannelUnavailable(_) => (StatusCode::SERVICE_UNAVAILABLE, "channel_unavailable"),
            Self::Store(StoreError::Rejected { .. }) => (StatusCode::CONFLICT, "rejected"),
            Self::Store(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage_failure"),
        };
        let body = Json(json!({ "error": code, "message": self.to_string() }));
        let mut response = (status, body).into_response();
        if status == StatusCode::UNAUTHORIZED {
            response
                .headers_mut()
                .insert(header::WWW_AUTHENTICATE, header::HeaderValue::from_static("Bearer"));
        }
        response
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/patients", get(list_patients))
        .route("/patients/{id}/report", get(get_report))
        .route("/patients/{id}/timeline", get(get_timeline))
        .route("/patients/{id}/thread", get(get_thread).post(post_intervention))
        .route("/alerts", get(list_alerts))
        .route("/alerts/{id}/ack", post(ack_alert))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_bearer));
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/webhook", post(webhook))
        .route("/webhook/outbox", get(outbox))
        .nest("/api", api)
        .with_state(state)
}

async fn require_bearer(State(state): State<AppState>, request: Request, next: Next) -> Response {
    let expected = &state.gateway.config().auth_token;
    let presented = request
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if presented != Some(expected.as_str()) {
        return GatewayError::Unauthorized.into_response();
    }
    next.run(request).await
}

/// Runs blocking store work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, GatewayError> + Send + 'static,
) -> Result<T, GatewayError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(GatewayError::BadRequest(format!("worker failed: {e}"))))
}

async fn webhook(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Result<Json<serde_json::Value>, GatewayError> {
    if let Some(secret) = &state.gateway.config().webhook_secret {
        let presented = headers.get(WEBHOOK_SECRET_HEADER).and_then(|v| v.to_str().ok());
        if presented != Some(secret.as_str()) {
            return Err(GatewayError::Unauthorized);
        }
    }
    let gateway = state.gateway.clone();
    match blocking(move || gateway.ingest_webhook(&body)).await? {
        IngestOutcome::Duplicate { .. } => Ok(Json(json!({ "ok": true, "duplicate": true }))),
        IngestOutcome::Handled { .. } => Ok(Json(json!({ "ok": true }))),
    }
}

#[derive(Debug, Deserialize)]
struct OutboxQuery {
    #[serde(default)]
    after: usize,
}

async fn outbox(State(state): State<AppState>, Query(q): Query<OutboxQuery>) -> Response {
    match &state.outbox {
        Some(outbox) => Json(outbox.sent_after(q.after)).into_response(),
        None => StatusCode::NOT_FOUND.into_response(),
    }
}

#[derive(Debug, Default, Deserialize)]
struct WindowQuery {
    start: Option<Instant>,
    end: Option<Instant>,
}

impl WindowQuery {
    fn resolve(&self, now: Instant) -> Result<Window, GatewayError> {
        let end = self.end.unwrap_or(now);
        let start = self.start.unwrap_or(end - Duration::days(7));
        Ok(Window::new(start, end)?)
    }
}

async fn list_patients(State(state): State<AppState>) -> Result<Json<Vec<provider::RosterEntry>>, GatewayError> {
    let g = &state.gateway;
    provider::list_patients(&g.store().snapshot(), g.now(), &g.config().thresholds).map(Json)
}

async fn get_report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<WindowQuery>,
) -> Result<Json<roberto_core::analytics::AdherenceReport>, GatewayError> {
    let g = &state.gateway;
    let window = q.resolve(g.now())?;
    provider::get_report(&g.store().snapshot(), &PatientId::new(id), &window, &g.config().thresholds).map(Json)
}

async fn get_timeline(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<WindowQuery>,
) -> Result<Json<provider::Timeline>, GatewayError> {
    let g = &state.gateway;
    let window = q.resolve(g.now())?;
    provider::get_timeline(&g.store().snapshot(), &PatientId::new(id), &window).map(Json)
}

async fn get_thread(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Vec<roberto_core::domain::InterventionMessage>>, GatewayError> {
    provider::get_thread(&state.gateway.store().snapshot(), &PatientId::new(id)).map(Json)
}

#[derive(Debug, Deserialize)]
struct PostBody {
    body: String,
}

async fn post_intervention(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<roberto_core::domain::InterventionMessage>), GatewayError> {
    let post: PostBody = serde_json::from_slice(&body).map_err(|e| GatewayError::BadRequest(e.to_string()))?;
    let gateway = state.gateway.clone();
    let message = blocking(move || gateway.post_intervention(&PatientId::new(id), &post.body)).await?;
    Ok((StatusCode::CREATED, Json(message)))
}

async fn list_alerts(
    State(state): State<AppState>,
    Query(filter): Query<AlertFilter>,
) -> Json<Vec<roberto_core::domain::Alert>> {
    Json(provider::list_alerts(&state.gateway.store().snapshot(), &filter))
}

async fn ack_alert(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<roberto_core::domain::Alert>, GatewayError> {
    let gateway = state.gateway.clone();
    blocking(move || gateway.ack_alert(&AlertId::new(id))).await.map(Json)
}
