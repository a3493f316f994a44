//! Review HTTP API.
//!
//! | method | path                          | body / response                         |
//! |--------|-------------------------------|-----------------------------------------|
//! | POST   | `/api/sessions`               | `{dataset, sample_size, seed}` → `{session_id, sample_size}` |
//! | GET    | `/api/sessions/{id}/next`     | pair record, or `{"done": true}`        |
//! | POST   | `/api/sessions/{id}/verdicts` | verdict fields → stored verdict         |
//! | GET    | `/api/sessions/{id}/summary`  | session summary                         |
//! | GET    | `/`                           | review UI                               |

use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rac_forge::review::{Next, ReviewStore, VerdictInput, DEFAULT_SAMPLE_SIZE};
use rac_forge::{jsonl, Error};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::{CliError, CliResult, ServeArgs, DEFAULT_SEED, EXIT_OK};

pub const DEFAULT_PORT: u16 = 8787;

const FALLBACK_PAGE: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>rac-forge review</title></head>
<body>
<h1>rac-forge review service</h1>
<p>No UI bundle configured (start with <code>--static-dir</code>). API:</p>
<ul>
<li><code>POST /api/sessions</code></li>
<li><code>GET /api/sessions/{id}/next</code></li>
<li><code>POST /api/sessions/{id}/verdicts</code></li>
<li><code>GET /api/sessions/{id}/summary</code></li>
</ul>
</body></html>
";

#[derive(Clone)]
struct AppState {
    store: Arc<ReviewStore>,
    data_root: PathBuf,
}

struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Validation(_) | Error::EmptyDataset | Error::Record(_) | Error::Line { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::Config(_) | Error::Io(_) | Error::Json(_) => StatusCode::BAD_REQUEST,
            Error::Provider(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    dataset: String,
    #[serde(default = "default_size")]
    sample_size: usize,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_size() -> usize {
    DEFAULT_SAMPLE_SIZE
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

async fn create_session(
    State(state): State<AppState>,
    Json(body): Json<CreateSession>,
) -> Result<Json<Value>, ApiError> {
    let session = tokio::task::spawn_blocking(move || {
        let path = state.data_root.join(&body.dataset);
        let pairs = jsonl::read_pairs(&path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read dataset {}: {io}", body.dataset)),
            other => other,
        })?;
        state.store.create_session(&body.dataset, &pairs, body.sample_size, body.seed)
    })
    .await
    .expect("session task")?;
    Ok(Json(json!({
        "session_id": session.session_id,
        "sample_size": session.sample_size(),
    })))
}

async fn next(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    Ok(Json(match state.store.next_unreviewed(&id)? {
        Next::Pair(p) => p.to_value(),
        Next::Done => json!({ "done": true }),
    }))
}

async fn verdict(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<VerdictInput>,
) -> Result<Json<Value>, ApiError> {
    let stored = state.store.record_verdict(&id, body)?;
    Ok(Json(serde_json::to_value(stored).expect("verdict serializes")))
}

async fn summary(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = state.store.summary(&id)?;
    Ok(Json(serde_json::to_value(s).expect("summary serializes")))
}

pub fn router(store: Arc<ReviewStore>, data_root: PathBuf, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/next", get(next))
        .route("/api/sessions/{id}/verdicts", post(verdict))
        .route("/api/sessions/{id}/summary", get(summary))
        .with_state(AppState { store, data_root });
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(FALLBACK_PAGE) })),
    }
}

fn runtime() -> CliResult<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Config(format!("cannot start runtime: {e}")))
}

async fn serve_on(listener: TcpListener, app: Router) -> std::io::Result<()> {
    listener.set_nonblocking(true)?;
    let listener = tokio::net::TcpListener::from_std(listener)?;
    axum::serve(listener, app).await
}

fn bind(addr: &str) -> CliResult<TcpListener> {
    TcpListener::bind(addr).map_err(|e| CliError::Config(format!("cannot bind {addr}: {e}")))
}

pub fn serve(a: ServeArgs) -> CliResult<i32> {
    let store = ReviewStore::open(&a.dir)?;
    let listener = bind(&format!("{}:{}", a.host, a.port))?;
    println!("review: listening on http://{}", listener.local_addr()?);
    let app = router(Arc::new(store), a.data_root, a.static_dir);
    runtime()?.block_on(serve_on(listener, app))?;
    Ok(EXIT_OK)
}

/// Start the API on `addr` in a background thread and return the bound
/// address. The server runs until the process exits.
pub fn spawn(dir: PathBuf, data_root: PathBuf, addr: &str) -> CliResult<SocketAddr> {
    let store = Arc::new(ReviewStore::open(dir)?);
    let listener = bind(addr)?;
    let local = listener.local_addr()?;
    let rt = runtime()?;
    std::thread::spawn(move || {
        let _ = rt.block_on(serve_on(listener, router(store, data_root, None)));
    });
    Ok(local)
}
