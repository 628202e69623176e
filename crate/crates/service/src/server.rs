use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fakescope::annotation::BucketScheme;
use fakescope::Error;
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::api::{analyze, AnalyzeRequest, DEFAULT_MAX_TEXT_BYTES};
use crate::registry::ModelRegistry;

#[derive(Clone)]
pub struct AppState {
    pub registry: Arc<ModelRegistry>,
    pub max_text_bytes: usize,
}

impl AppState {
    pub fn new(registry: ModelRegistry) -> Self {
        Self {
            registry: Arc::new(registry),
            max_text_bytes: DEFAULT_MAX_TEXT_BYTES,
        }
    }
}

struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::Timeout(_) => StatusCode::GATEWAY_TIMEOUT,
            Error::Protocol(_) | Error::VocabularyMismatch(_) => StatusCode::BAD_GATEWAY,
            Error::Parameter(_) | Error::NoTokens | Error::Capability(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, err.to_string())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/analyze", post(analyze_handler))
        .route("/api/models", get(models_handler))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

async fn models_handler(State(state): State<AppState>) -> Response {
    Json(json!({ "models": state.registry.entries() })).into_response()
}

async fn analyze_handler(State(state): State<AppState>, body: Body) -> Result<Response, ApiError> {
    // Headroom for JSON escaping; the text itself is checked below.
    let body_limit = state.max_text_bytes.saturating_mul(6).saturating_add(4096);
    let bytes = to_bytes(body, body_limit)
        .await
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "request body too large"))?;
    let req: AnalyzeRequest = serde_json::from_slice(&bytes)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed request: {e}")))?;
    if req.text.len() > state.max_text_bytes {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!(
                "text is {} bytes; the limit is {}",
                req.text.len(),
                state.max_text_bytes
            ),
        ));
    }
    let mode = req.mode.resolve()?;
    let scheme = match &req.scheme {
        Some(spec) => spec.resolve()?,
        None => BucketScheme::default(),
    };
    let Some(model) = state.registry.get(&req.model) else {
        return Err(ApiError {
            status: StatusCode::NOT_FOUND,
            body: json!({
                "error": format!("unknown model {:?}", req.model),
                "models": state.registry.names(),
            }),
        });
    };
    let response = tokio::task::spawn_blocking(move || analyze(model.as_ref(), &req.text, mode, &scheme))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(response).into_response())
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
