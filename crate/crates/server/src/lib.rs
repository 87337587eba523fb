//! Read-only HTTP JSON API over a [`FacetIndex`].
//!
//! Routes: `GET /api/search`, `GET /api/records/{pmid}`, `GET /api/health`.
//! The index sits behind an [`IndexHandle`] that can be swapped atomically
//! while requests are in flight; until one is installed every route answers
//! 503.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use axum::body::Body;
use axum::extract::{Path, RawQuery, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use medfacet_core::index::{FacetIndex, FacetQuery, IndexStore, SnapshotError};
use serde::Serialize;
use tower_http::compression::CompressionLayer;
use tower_http::cors::{AllowOrigin, CorsLayer};

mod query;

pub use query::{parse_search_query, ParamError};

// --- errors -------------------------------------------------------------------

/// JSON error body: `{status, code, message}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "status_code")]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

fn status_code<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn unavailable() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "index_unavailable", "index is not loaded")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &self)
    }
}

impl From<ParamError> for ApiError {
    fn from(e: ParamError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string())
    }
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_vec(body) {
        Ok(bytes) => {
            let mut res = Response::new(Body::from(bytes));
            *res.status_mut() = status;
            res.headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            res
        }
        Err(e) => {
            tracing::error!(error = %e, "response serialisation failed");
            StatusCode::INTERNAL_SERVER_ERROR.into_response()
        }
    }
}

// --- index handle -------------------------------------------------------------

/// Shared, atomically replaceable reference to the served index.
#[derive(Debug, Clone, Default)]
pub struct IndexHandle {
    slot: Arc<RwLock<Option<Arc<FacetIndex>>>>,
}

impl IndexHandle {
    /// A handle with nothing loaded yet.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_index(index: FacetIndex) -> Self {
        let h = Self::empty();
        h.install(index);
        h
    }

    /// Replaces the served index; requests already running keep the old one.
    pub fn install(&self, index: FacetIndex) {
        *self.slot.write().unwrap_or_else(|e| e.into_inner()) = Some(Arc::new(index));
    }

    pub fn clear(&self) {
        *self.slot.write().unwrap_or_else(|e| e.into_inner()) = None;
    }

    pub fn current(&self) -> Option<Arc<FacetIndex>> {
        self.slot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Loads the committed snapshot of `store` and installs it.
    pub fn reload(&self, store: &IndexStore) -> Result<usize, SnapshotError> {
        let index = store.load_existing()?;
        let n = index.len();
        self.install(index);
        Ok(n)
    }
}

// --- access log ---------------------------------------------------------------

/// Destination of the line-delimited JSON access log.
#[derive(Clone)]
pub struct AccessLog {
    sink: Arc<Mutex<Box<dyn Write + Send>>>,
}

impl std::fmt::Debug for AccessLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AccessLog")
    }
}

impl AccessLog {
    pub fn new(sink: impl Write + Send + 'static) -> Self {
        AccessLog {
            sink: Arc::new(Mutex::new(Box::new(sink))),
        }
    }

    pub fn stderr() -> Self {
        Self::new(std::io::stderr())
    }

    fn record(&self, entry: &AccessEntry<'_>) {
        let Ok(mut line) = serde_json::to_vec(entry) else {
            return;
        };
        line.push(b'\n');
        let mut sink = self.sink.lock().unwrap_or_else(|e| e.into_inner());
        let _ = sink.write_all(&line);
        let _ = sink.flush();
    }
}

#[derive(Serialize)]
struct AccessEntry<'a> {
    ts_ms: u128,
    method: &'a str,
    path: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    query: Option<&'a str>,
    status: u16,
    duration_us: u128,
}

async fn access_log(State(log): State<AccessLog>, req: Request, next: Next) -> Response {
    let start = Instant::now();
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let query = req.uri().query().map(str::to_string);
    let res = next.run(req).await;
    log.record(&AccessEntry {
        ts_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis()),
        method: method.as_str(),
        path: &path,
        query: query.as_deref(),
        status: res.status().as_u16(),
        duration_us: start.elapsed().as_micros(),
    });
    res
}

// --- routes -------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct AppState {
    pub index: IndexHandle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Health {
    pub status: String,
    pub record_count: usize,
    pub watermark: Option<String>,
}

fn loaded(state: &AppState) -> Result<Arc<FacetIndex>, ApiError> {
    state.index.current().ok_or_else(ApiError::unavailable)
}

async fn search(State(state): State<AppState>, RawQuery(raw): RawQuery) -> Result<Response, ApiError> {
    let q: FacetQuery = parse_search_query(raw.as_deref().unwrap_or(""))?;
    let index = loaded(&state)?;
    let result = index
        .search(&q)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", e.to_string()))?;
    Ok(json_response(StatusCode::OK, &result))
}

async fn record(State(state): State<AppState>, Path(pmid): Path<String>) -> Result<Response, ApiError> {
    let pmid: u64 = pmid
        .parse()
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad_pmid", format!("{pmid:?} is not a PMID")))?;
    let index = loaded(&state)?;
    match index.get(pmid) {
        Some(r) => Ok(json_response(StatusCode::OK, &r)),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no record {pmid}"))),
    }
}

async fn health(State(state): State<AppState>) -> Result<Response, ApiError> {
    let index = loaded(&state)?;
    Ok(json_response(
        StatusCode::OK,
        &Health {
            status: "ok".into(),
            record_count: index.len(),
            watermark: index.watermark(),
        },
    ))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_route", "unknown endpoint")
}

/// Server settings normally taken from CLI flags or the environment.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub index: PathBuf,
    /// Origin allowed to call the API from a browser; `*` allows any.
    pub cors_origin: Option<String>,
}

/// Builds the application router.
pub fn router(index: IndexHandle, cors_origin: Option<&str>, log: Option<AccessLog>) -> Router {
    let mut app = Router::new()
        .route("/api/search", get(search))
        .route("/api/records/{pmid}", get(record))
        .route("/api/health", get(health))
        .fallback(fallback)
        .with_state(AppState { index });
    if let Some(origin) = cors_origin {
        let allow = if origin == "*" {
            AllowOrigin::any()
        } else {
            match HeaderValue::from_str(origin) {
                Ok(v) => AllowOrigin::list([v]),
                Err(_) => {
                    tracing::warn!(origin, "ignoring unusable CORS origin");
                    AllowOrigin::list([])
                }
            }
        };
        app = app.layer(
            CorsLayer::new()
                .allow_origin(allow)
                .allow_methods([Method::GET, Method::OPTIONS]),
        );
    }
    app = app.layer(CompressionLayer::new());
    if let Some(log) = log {
        app = app.layer(middleware::from_fn_with_state(log, access_log));
    }
    app
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Resolves when the process receives SIGINT or SIGTERM.
pub async fn shutdown_signal() {
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
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down");
}

/// Binds, loads the index in the background and serves until `shutdown`
/// resolves. `on_bound` receives the actual listening address.
pub async fn serve(
    cfg: ServerConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
    on_bound: impl FnOnce(SocketAddr),
) -> Result<(), ServeError> {
    let listener = tokio::net::TcpListener::bind(cfg.addr)
        .await
        .map_err(|source| ServeError::Bind { addr: cfg.addr, source })?;
    on_bound(listener.local_addr()?);

    let handle = IndexHandle::empty();
    let store = IndexStore::new(&cfg.index);
    let loader = handle.clone();
    tokio::task::spawn_blocking(move || match loader.reload(&store) {
        Ok(n) => tracing::info!(records = n, "index loaded"),
        Err(e) => tracing::error!(error = %e, "index load failed"),
    });

    let app = router(handle, cfg.cors_origin.as_deref(), Some(AccessLog::stderr()));
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}
