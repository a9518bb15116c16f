//! HTTP reconstruction service.
//!
//! Direct methods run on the blocking pool as soon as they arrive. Model-based
//! solves are admitted up to `workers + queue_depth` at a time (further
//! requests get 409), run at most `workers` concurrently, and are cancelled
//! between iterations when a newer request from the same session arrives.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use oatk_core::io::encode_image;
use oatk_core::solver::Lambda;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;

use crate::config::EngineConfig;
use crate::dataset::{load_catalog, Dataset};
use crate::recon::{preview_png, reconstruct, Method, ReconParams};

/// Extra model-based requests that may wait for a worker.
pub const MB_QUEUE_DEPTH: usize = 4;

pub struct AppState {
    pub config: EngineConfig,
    pub datasets: BTreeMap<String, Dataset>,
    mb_admission: Arc<Semaphore>,
    mb_workers: Arc<Semaphore>,
    sessions: Mutex<HashMap<String, Arc<AtomicBool>>>,
}

impl AppState {
    pub fn new(config: EngineConfig, datasets: BTreeMap<String, Dataset>, workers: usize) -> Self {
        let workers = workers.max(1);
        Self {
            config,
            datasets,
            mb_admission: Arc::new(Semaphore::new(workers + MB_QUEUE_DEPTH)),
            mb_workers: Arc::new(Semaphore::new(workers)),
            sessions: Mutex::new(HashMap::new()),
        }
    }

    /// Load the datasets named by `config.dataset_root`, one MB worker per core.
    pub fn load(config: EngineConfig) -> oatk_core::Result<Self> {
        let datasets = load_catalog(&config.dataset_root, &config.geometry)?;
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Ok(Self::new(config, datasets, workers))
    }

    /// Register a new solve for `session`, cancelling the one it supersedes.
    fn supersede(&self, session: &str) -> Arc<AtomicBool> {
        let flag = Arc::new(AtomicBool::new(false));
        let mut sessions = self.sessions.lock().expect("session map");
        if let Some(old) = sessions.insert(session.to_string(), flag.clone()) {
            old.store(true, Ordering::Relaxed);
        }
        flag
    }

    fn finish(&self, session: &str, flag: &Arc<AtomicBool>) {
        let mut sessions = self.sessions.lock().expect("session map");
        if sessions.get(session).is_some_and(|f| Arc::ptr_eq(f, flag)) {
            sessions.remove(session);
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReconRequest {
    pub dataset_id: String,
    pub frame_index: usize,
    pub method: String,
    pub sos_mps: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Requests sharing a session id supersede each other (model-based only).
    #[serde(default)]
    pub session_id: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ImagePayload {
    pub nx: usize,
    pub ny: usize,
    /// Base64 of the OAIM file bytes.
    pub oaim_base64: String,
    /// Base64 of an 8-bit grayscale PNG, window `[0, max]`.
    pub preview_png_base64: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReconResponse {
    pub method: String,
    pub image: ImagePayload,
    pub residual_norm: Option<f64>,
    pub elapsed_ms: f64,
    pub sos_used: f64,
    pub lambda: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/datasets", get(list_datasets))
        .route("/api/datasets/{id}/frames/{k}/meta", get(frame_meta))
        .route("/api/recon", post(recon))
        .with_state(state)
}

async fn list_datasets(State(st): State<Arc<AppState>>) -> impl IntoResponse {
    let list: Vec<_> = st.datasets.values().map(Dataset::summary).collect();
    Json(list)
}

fn dataset<'a>(st: &'a AppState, id: &str) -> Result<&'a Dataset, ApiError> {
    st.datasets
        .get(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown dataset {id:?}")))
}

async fn frame_meta(
    State(st): State<Arc<AppState>>,
    Path((id, k)): Path<(String, usize)>,
) -> Result<impl IntoResponse, ApiError> {
    let meta = dataset(&st, &id)?
        .frame_meta(k)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("dataset {id:?} has no frame {k}")))?;
    Ok(Json(meta))
}

async fn recon(
    State(st): State<Arc<AppState>>,
    body: Result<Json<ReconRequest>, JsonRejection>,
) -> Result<Json<ReconResponse>, ApiError> {
    let Json(req) = body?;
    let method: Method = req
        .method
        .parse()
        .map_err(|e: String| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    if !st.config.sos_grid.contains(req.sos_mps) {
        let g = st.config.sos_grid;
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!(
                "sos_mps {} is not on the grid {}..={} step {}",
                req.sos_mps, g.min_mps, g.max_mps, g.step_mps
            ),
        ));
    }
    if let Some(l) = req.lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "lambda must be finite and >= 0"));
        }
    }
    let ds = dataset(&st, &req.dataset_id)?;
    if req.frame_index >= ds.frames.len() {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("dataset {:?} has no frame {}", req.dataset_id, req.frame_index),
        ));
    }
    let params = ReconParams {
        lambda: req.lambda.map(Lambda::Value),
        ..ReconParams::new(method, req.sos_mps)
    };

    // Model-based admission and cancellation.
    let mut permits = None;
    let mut cancel = None;
    if method == Method::Mb {
        let admitted = st.mb_admission.clone().try_acquire_owned().map_err(|_| {
            ApiError::new(StatusCode::CONFLICT, "model-based worker queue is full")
        })?;
        if let Some(session) = &req.session_id {
            cancel = Some((session.clone(), st.supersede(session)));
        }
        let worker = st
            .mb_workers
            .clone()
            .acquire_owned()
            .await
            .expect("semaphore is never closed");
        permits = Some((admitted, worker));
    }

    let st2 = st.clone();
    let flag = cancel.as_ref().map(|(_, f)| f.clone());
    let (dataset_id, frame) = (req.dataset_id.clone(), req.frame_index);
    let result = tokio::task::spawn_blocking(move || {
        let s = &st2.datasets[&dataset_id].frames[frame];
        reconstruct(&st2.config, s, &params, flag.as_deref())
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    drop(permits);
    if let Some((session, flag)) = &cancel {
        st.finish(session, flag);
    }

    let out = result.map_err(|e| match e {
        oatk_core::Error::Cancelled => {
            ApiError::new(StatusCode::CONFLICT, "superseded by a newer request")
        }
        e => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    })?;
    let (ny, nx) = out.image.pixels.dim();
    Ok(Json(ReconResponse {
        method: method.to_string(),
        image: ImagePayload {
            nx,
            ny,
            oaim_base64: B64.encode(encode_image(&out.image)),
            preview_png_base64: B64.encode(preview_png(&out.image)),
        },
        residual_norm: out.residual_norm,
        elapsed_ms: out.elapsed_ms,
        sos_used: out.sos_used,
        lambda: out.solve.as_ref().map(|r| r.lambda),
        iterations: out.solve.as_ref().map(|r| r.iterations_run),
    }))
}

/// Bind and serve until Ctrl-C.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!(
        "serving {} datasets on http://{}",
        state.datasets.len(),
        listener.local_addr()?
    );
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
