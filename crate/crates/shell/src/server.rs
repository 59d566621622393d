//! Stateless HTTP API over the core, plus an LRU cache for tiles.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gsign_core::mapper::{encode_field, render_field, FieldFormat, Transform, DEFAULT_STEPS};
use gsign_core::Scalar;
use lru::LruCache;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::config::ServiceConfig;
use crate::error::ShellError;
use crate::report::{self, OrbitOptions};

/// Default `n` for `/api/orbit`.
pub const DEFAULT_ORBIT_N: usize = 10_000;

/// Exact parameter tuple of a tile; floats by bit pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TileKey {
    rect: [u64; 4],
    width: usize,
    height: usize,
    alpha: u64,
    steps: usize,
}

struct Tile {
    body: Vec<u8>,
    alpha_hex: String,
    max: f64,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    tiles: Arc<Mutex<LruCache<TileKey, Arc<Tile>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let cap = NonZeroUsize::new(config.tile_cache_entries.max(1)).expect("nonzero");
        AppState {
            config: Arc::new(config),
            tiles: Arc::new(Mutex::new(LruCache::new(cap))),
        }
    }
}

struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl From<ShellError> for ApiError {
    fn from(e: ShellError) -> Self {
        let status = match &e {
            ShellError::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            ShellError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let body = match &e {
            ShellError::Expr {
                field,
                input,
                source,
            } => json!({
                "error": e.to_string(),
                "field": field,
                "input": input,
                "position": source.position(),
                "detail": source.to_string(),
            }),
            _ => json!({ "error": e.to_string() }),
        };
        ApiError { status, body }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type Params = Query<HashMap<String, String>>;

fn required<'a>(q: &'a HashMap<String, String>, name: &str) -> Result<&'a str, ApiError> {
    q.get(name)
        .map(String::as_str)
        .ok_or_else(|| ShellError::Usage(format!("missing parameter {name}")).into())
}

fn number(q: &HashMap<String, String>, name: &str, default: usize) -> Result<usize, ApiError> {
    match q.get(name) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| ShellError::Usage(format!("{name} must be a nonnegative integer")).into()),
    }
}

fn limit(what: &'static str, value: usize, limit: usize) -> Result<(), ApiError> {
    if value > limit {
        return Err(ShellError::TooLarge { what, value, limit }.into());
    }
    Ok(())
}

async fn health() -> &'static str {
    "ok"
}

async fn orbit(State(state): State<AppState>, Query(q): Params) -> Result<Response, ApiError> {
    let n = number(&q, "n", DEFAULT_ORBIT_N)?;
    limit("n", n, state.config.max_horizon)?;
    let params = report::params(required(&q, "alpha")?, required(&q, "z")?, n)?;
    let certify = q.get("certify").is_some_and(|v| v == "1" || v == "true");
    let opts = OrbitOptions {
        certify,
        ..OrbitOptions::default()
    };
    let rep = tokio::task::spawn_blocking(move || report::orbit_report(&params, &opts).1)
        .await
        .map_err(|e| ShellError::Domain(e.to_string()))?;
    Ok(Json(rep).into_response())
}

async fn regions(Query(q): Params) -> Result<Response, ApiError> {
    let alpha = report::parse_alpha(required(&q, "alpha")?)?;
    Ok(Json(report::disks_report(alpha)?).into_response())
}

async fn tile(State(state): State<AppState>, Query(q): Params) -> Result<Response, ApiError> {
    let steps = number(&q, "steps", DEFAULT_STEPS)?;
    if steps == 0 {
        return Err(ShellError::Usage("steps must be at least 1".into()).into());
    }
    let spec = report::field_spec(
        required(&q, "rect")?,
        required(&q, "res")?,
        required(&q, "alpha")?,
        steps,
        Transform::Linear,
    )?;
    limit(
        "width*height",
        spec.resolution.pixels(),
        state.config.max_tile_pixels,
    )?;
    limit("steps", steps, state.config.max_tile_steps)?;
    let r = spec.rect;
    let key = TileKey {
        rect: [
            r.re_min.to_bits(),
            r.re_max.to_bits(),
            r.im_min.to_bits(),
            r.im_max.to_bits(),
        ],
        width: spec.resolution.width,
        height: spec.resolution.height,
        alpha: spec.alpha.to_bits(),
        steps,
    };
    let cached = state
        .tiles
        .lock()
        .expect("tile cache lock")
        .get(&key)
        .cloned();
    let (tile, hit) = match cached {
        Some(t) => (t, true),
        None => {
            let t = tokio::task::spawn_blocking(move || -> Result<Tile, ShellError> {
                let field = render_field(&spec, None).map_err(ShellError::domain)?;
                let (body, side) =
                    encode_field(&field, FieldFormat::RawF32).map_err(ShellError::domain)?;
                Ok(Tile {
                    body,
                    alpha_hex: spec.alpha.to_hex_bits(),
                    max: side.max,
                })
            })
            .await
            .map_err(|e| ShellError::Domain(e.to_string()))??;
            let t = Arc::new(t);
            state
                .tiles
                .lock()
                .expect("tile cache lock")
                .put(key, t.clone());
            (t, false)
        }
    };
    let mut resp = Response::new(Body::from(tile.body.clone()));
    let h = resp.headers_mut();
    h.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/octet-stream"),
    );
    h.insert(
        "x-cache",
        HeaderValue::from_static(if hit { "hit" } else { "miss" }),
    );
    h.insert(
        "x-alpha-hex",
        HeaderValue::from_str(&tile.alpha_hex).expect("hex is ascii"),
    );
    h.insert(
        "x-field-max",
        HeaderValue::from_str(&format!("{:e}", tile.max)).expect("ascii"),
    );
    h.insert("x-width", HeaderValue::from(key.width));
    h.insert("x-height", HeaderValue::from(key.height));
    Ok(resp)
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/orbit", get(orbit))
        .route("/api/tile", get(tile))
        .route("/api/regions", get(regions))
        .with_state(state);
    match static_dir {
        Some(dir) if dir.is_dir() => api.fallback_service(ServeDir::new(dir)),
        _ => api,
    }
}

pub async fn serve(config: ServiceConfig) -> Result<(), ShellError> {
    let bind = config.bind.clone();
    let listener = tokio::net::TcpListener::bind(&bind)
        .await
        .map_err(|source| ShellError::Io {
            path: bind.clone(),
            source,
        })?;
    log::info!("listening on {bind}");
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| ShellError::Io { path: bind, source })
}
