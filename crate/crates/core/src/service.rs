//! HTTP service: zoomable tiles of `X_n`, dragon renders and membership
//! verdicts.
//!
//! Routes (all `GET`):
//!
//! * `/api/meta`
//! * `/api/tiles/{n}/{zoom}/{tx}/{ty}.png[?map=gray|ember]`
//! * `/api/dragon?re=&im=&depth=&size=[&map=]`
//! * `/api/member?re=&im=&eps=&max_depth=`
//!
//! Tiles partition the square `[-2.05, 2.05]^2` into `2^zoom x 2^zoom`
//! blocks of one origin-centered pixel lattice, `tx` rightward and `ty`
//! downward, counted with [`EdgeRule::Shared`] so mirror tiles are exact
//! mirror images. Rendering and membership run on separate thread pools.

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use tokio::sync::{watch, OnceCell};

use crate::density::{self, DensityGrid, EdgeRule, PixelWindow, RootBuffer, Viewport};
use crate::dragon::{self, DragonQuery, MembershipVerdict, SearchLimits, SIGNS};
use crate::error::{param, Error, Result};
use crate::render::{self, ColorMap};

/// Half extent of the tile pyramid's root square.
pub const TILE_EXTENT: f64 = 2.05;
/// Dragon and membership queries beyond this modulus are refused.
pub const MAX_ABS_Q: f64 = 0.98;
pub const MAX_DRAGON_DEPTH: u32 = 48;

/// Service settings, read from a flat `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub cache_dir: PathBuf,
    pub max_n: u32,
    pub tile_size: u32,
    pub node_budget: u64,
    pub request_timeout: Duration,
    /// Largest `n` whose roots may be solved on demand by a tile request.
    pub lazy_max_n: u32,
    /// How long a tile request waits for an on-demand solve before 503.
    pub compute_wait: Duration,
    pub max_zoom: u32,
    pub render_threads: usize,
    pub member_threads: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2);
        Self {
            listen: "127.0.0.1:8080".parse().unwrap(),
            cache_dir: PathBuf::from("lwroots-cache"),
            max_n: 24,
            tile_size: 256,
            node_budget: dragon::DEFAULT_NODE_BUDGET,
            request_timeout: Duration::from_secs(10),
            lazy_max_n: 16,
            compute_wait: Duration::from_secs(5),
            max_zoom: 16,
            render_threads: cores.max(1),
            member_threads: (cores / 2).max(1),
        }
    }
}

impl ServiceConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| param(format!("config line {}: expected key = value", lineno + 1)))?;
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Applies `LWROOTS_<KEY>` overrides, e.g. `LWROOTS_MAX_N=20`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            if let Some(key) = k.as_ref().strip_prefix("LWROOTS_") {
                self.set(&key.to_ascii_lowercase(), v.as_ref())?;
            }
        }
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| param(format!("config {key}: cannot parse {value:?}")))
        }
        match key {
            "listen" => self.listen = num(key, value)?,
            "cache_dir" => self.cache_dir = PathBuf::from(value),
            "max_n" => self.max_n = num(key, value)?,
            "tile_size" => self.tile_size = num(key, value)?,
            "node_budget" => self.node_budget = num(key, value)?,
            "request_timeout_ms" => self.request_timeout = Duration::from_millis(num(key, value)?),
            "lazy_max_n" => self.lazy_max_n = num(key, value)?,
            "compute_wait_ms" => self.compute_wait = Duration::from_millis(num(key, value)?),
            "max_zoom" => self.max_zoom = num(key, value)?,
            "render_threads" => self.render_threads = num(key, value)?,
            "member_threads" => self.member_threads = num(key, value)?,
            other => return Err(param(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=24).contains(&self.max_n) {
            return Err(param(format!("max_n must be in 2..=24, got {}", self.max_n)));
        }
        if ![128, 256, 512].contains(&self.tile_size) {
            return Err(param(format!("tile_size must be 128, 256 or 512, got {}", self.tile_size)));
        }
        if self.max_zoom > 20 {
            return Err(param("max_zoom must be at most 20"));
        }
        if self.node_budget == 0 || self.render_threads == 0 || self.member_threads == 0 {
            return Err(param("node_budget and thread counts must be positive"));
        }
        Ok(())
    }
}

/// One tile of the pyramid for term count `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TileAddress {
    pub n: u32,
    pub zoom: u32,
    pub tx: u32,
    pub ty: u32,
}

impl TileAddress {
    pub fn new(n: u32, zoom: u32, tx: u32, ty: u32) -> Result<Self> {
        if zoom > 24 || tx as u64 >= 1u64 << zoom || ty as u64 >= 1u64 << zoom {
            return Err(param(format!("tile ({zoom}, {tx}, {ty}) is outside the pyramid")));
        }
        Ok(Self { n, zoom, tx, ty })
    }

    /// The zoom-level lattice and this tile's block of it.
    pub fn frame(&self, tile_size: u32) -> (Viewport, PixelWindow) {
        let side = tile_size << self.zoom;
        let viewport = Viewport { center: Complex64::new(0.0, 0.0), half_width: TILE_EXTENT, width: side, height: side };
        let window = PixelWindow { x0: self.tx * tile_size, y0: self.ty * tile_size, width: tile_size, height: tile_size };
        (viewport, window)
    }
}

/// Root counts of one tile.
pub fn tile_grid(roots: &RootBuffer, addr: &TileAddress, tile_size: u32) -> DensityGrid {
    let (viewport, window) = addr.frame(tile_size);
    let mut grid = DensityGrid::windowed(viewport, window, EdgeRule::Shared).expect("tile window fits its lattice");
    grid.accumulate(roots.roots());
    grid
}

pub fn render_tile(roots: &RootBuffer, addr: &TileAddress, tile_size: u32, map: &ColorMap) -> Result<Vec<u8>> {
    render::encode_png(&render::shade(&tile_grid(roots, addr, tile_size), map))
}

/// Verdict JSON shared by the service and the CLI.
pub fn verdict_json(v: &MembershipVerdict) -> String {
    #[derive(Serialize)]
    struct Wire<'a> {
        status: &'a str,
        residual: f64,
        witness: Option<String>,
        nodes: u64,
        depth: u32,
    }
    serde_json::to_string(&Wire {
        status: v.status.as_str(),
        residual: v.residual,
        witness: v.witness_string(),
        nodes: v.nodes_explored,
        depth: v.max_depth_reached,
    })
    .expect("verdict serializes")
}

/// Checks `q` for a membership query and runs it.
pub fn member_query(
    q: Complex64,
    eps: f64,
    max_depth: u32,
    node_budget: u64,
    cancel: Option<&AtomicBool>,
) -> Result<MembershipVerdict> {
    if !q.is_finite() || q.norm() >= 1.0 {
        return Err(Error::OutOfScope(format!(
            "|q| = {} but q in closure(X) <=> 0 in D_q requires |q| < 1",
            q.norm()
        )));
    }
    check_modulus(q)?;
    let limits = SearchLimits { eps, max_depth, node_budget };
    dragon::search(DragonQuery::new(q)?, SIGNS, &limits, cancel)
}

fn check_modulus(q: Complex64) -> Result<()> {
    if q.norm() > MAX_ABS_Q {
        return Err(Error::OutOfScope(format!(
            "|q| = {:.6} is too close to the unit circle (limit {MAX_ABS_Q})",
            q.norm()
        )));
    }
    Ok(())
}

#[derive(Debug)]
enum ApiError {
    NotFound(String),
    BadRequest(String),
    Busy(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match &self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Busy(m) => (StatusCode::SERVICE_UNAVAILABLE, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        let body = serde_json::json!({ "error": msg }).to_string();
        let mut resp = (status, [(header::CONTENT_TYPE, "application/json")], body).into_response();
        if matches!(self, ApiError::Busy(_)) {
            resp.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from_static("2"));
        }
        resp
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::OutOfScope(_) => ApiError::BadRequest(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

type RootState = Option<std::result::Result<Arc<RootBuffer>, String>>;
type TileCell = Arc<OnceCell<Arc<Vec<u8>>>>;

/// Shared state behind the router.
pub struct AppState {
    config: ServiceConfig,
    roots: Mutex<HashMap<u32, watch::Receiver<RootState>>>,
    inflight: Mutex<HashMap<(TileAddress, String), TileCell>>,
    render_pool: Arc<rayon::ThreadPool>,
    member_pool: Arc<rayon::ThreadPool>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self> {
        config.validate()?;
        let pool = |threads: usize, name: &'static str| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .thread_name(move |i| format!("{name}-{i}"))
                .build()
                .map(Arc::new)
                .map_err(|e| Error::Resource(format!("cannot start {name} pool: {e}")))
        };
        Ok(Self {
            render_pool: pool(config.render_threads, "render")?,
            member_pool: pool(config.member_threads, "member")?,
            config,
            roots: Mutex::new(HashMap::new()),
            inflight: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Term counts with a root cache file on disk.
    pub fn cached_terms(&self) -> Vec<u32> {
        (2..=self.config.max_n).filter(|&n| density::cache_path(&self.config.cache_dir, n).exists()).collect()
    }

    fn computing_terms(&self) -> Vec<u32> {
        let map = self.roots.lock().unwrap();
        let mut v: Vec<u32> = map.iter().filter(|(_, rx)| rx.borrow().is_none()).map(|(&n, _)| n).collect();
        v.sort_unstable();
        v
    }

    async fn root_buffer(&self, n: u32) -> std::result::Result<Arc<RootBuffer>, ApiError> {
        let mut rx = {
            let mut map = self.roots.lock().unwrap();
            match map.get(&n) {
                Some(rx) => rx.clone(),
                None => {
                    let path = density::cache_path(&self.config.cache_dir, n);
                    let on_disk = path.exists();
                    if !on_disk && n > self.config.lazy_max_n {
                        return Err(ApiError::NotFound(format!(
                            "roots for n={n} are not precomputed; run `lwroots precompute --n {n}`"
                        )));
                    }
                    let (tx, rx) = watch::channel(None);
                    map.insert(n, rx.clone());
                    let dir = self.config.cache_dir.clone();
                    let threads = self.config.render_threads;
                    self.render_pool.spawn(move || {
                        let result = density::load_or_solve(n, threads, Some(&dir))
                            .map(Arc::new)
                            .map_err(|e| e.to_string());
                        let _ = tx.send(Some(result));
                    });
                    rx
                }
            }
        };
        let waited = tokio::time::timeout(self.config.compute_wait, rx.wait_for(|s| s.is_some())).await;
        match waited {
            Ok(Ok(state)) => match state.as_ref().expect("waited for Some") {
                Ok(buf) => Ok(buf.clone()),
                Err(msg) => {
                    let msg = msg.clone();
                    drop(state);
                    // let a later request retry
                    self.roots.lock().unwrap().remove(&n);
                    Err(ApiError::Internal(msg))
                }
            },
            Ok(Err(_)) => Err(ApiError::Internal(format!("root computation for n={n} was dropped"))),
            Err(_) => Err(ApiError::Busy(format!("roots for n={n} are being computed; retry shortly"))),
        }
    }

    fn tile_path(&self, addr: &TileAddress, map: &str) -> PathBuf {
        self.config
            .cache_dir
            .join("tiles")
            .join(map)
            .join(self.config.tile_size.to_string())
            .join(addr.n.to_string())
            .join(addr.zoom.to_string())
            .join(addr.tx.to_string())
            .join(format!("{}.png", addr.ty))
    }

    async fn tile(&self, addr: TileAddress, map: ColorMap) -> std::result::Result<Arc<Vec<u8>>, ApiError> {
        let path = self.tile_path(&addr, &map.name);
        if let Ok(bytes) = fs::read(&path) {
            return Ok(Arc::new(bytes));
        }
        let key = (addr, map.name.clone());
        let cell = self.inflight.lock().unwrap().entry(key.clone()).or_default().clone();
        let result = cell
            .get_or_try_init(|| async {
                let roots = self.root_buffer(addr.n).await?;
                let size = self.config.tile_size;
                let bytes = run_on(&self.render_pool, move || render_tile(&roots, &addr, size, &map)).await??;
                write_atomic(&path, &bytes).map_err(|e| ApiError::Internal(e.to_string()))?;
                Ok::<_, ApiError>(Arc::new(bytes))
            })
            .await
            .cloned();
        let mut inflight = self.inflight.lock().unwrap();
        if inflight.get(&key).is_some_and(|c| Arc::ptr_eq(c, &cell)) {
            inflight.remove(&key);
        }
        result
    }
}

async fn run_on<T, F>(pool: &rayon::ThreadPool, f: F) -> std::result::Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> T + Send + 'static,
{
    let (tx, rx) = tokio::sync::oneshot::channel();
    pool.spawn(move || {
        let _ = tx.send(f());
    });
    rx.await.map_err(|_| ApiError::Internal("worker dropped the job".into()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}-{:?}", std::process::id(), std::thread::current().id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn etag(bytes: &[u8]) -> String {
    format!("\"{}\"", hex::encode(Sha256::digest(bytes)))
}

fn png_response(bytes: &[u8], headers: &HeaderMap) -> Response {
    let tag = etag(bytes);
    let matches = headers.get(header::IF_NONE_MATCH).and_then(|v| v.to_str().ok()) == Some(tag.as_str());
    let status = if matches { StatusCode::NOT_MODIFIED } else { StatusCode::OK };
    let body = if matches { Vec::new() } else { bytes.to_vec() };
    (
        status,
        [
            (header::CONTENT_TYPE, "image/png".to_string()),
            (header::ETAG, tag),
            (header::CACHE_CONTROL, "public, max-age=86400".to_string()),
        ],
        body,
    )
        .into_response()
}

fn json_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/meta", get(get_meta))
        .route("/api/tiles/{n}/{zoom}/{tx}/{file}", get(get_tile))
        .route("/api/dragon", get(get_dragon))
        .route("/api/member", get(get_member))
        .fallback(|| async { ApiError::NotFound("no such route".into()) })
        .with_state(state)
}

async fn get_meta(State(state): State<Arc<AppState>>) -> Response {
    let c = &state.config;
    let body = serde_json::json!({
        "service": "lwroots",
        "version": env!("CARGO_PKG_VERSION"),
        "cached_n": state.cached_terms(),
        "computing_n": state.computing_terms(),
        "limits": {
            "max_n": c.max_n,
            "lazy_max_n": c.lazy_max_n,
            "tile_size": c.tile_size,
            "max_zoom": c.max_zoom,
            "node_budget": c.node_budget,
            "request_timeout_ms": c.request_timeout.as_millis() as u64,
            "max_abs_q": MAX_ABS_Q,
            "max_dragon_depth": MAX_DRAGON_DEPTH,
        },
    });
    json_response(body.to_string())
}

async fn get_tile(
    State(state): State<Arc<AppState>>,
    UrlPath((n, zoom, tx, file)): UrlPath<(String, String, String, String)>,
    Query(params): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> std::result::Result<Response, ApiError> {
    let bad = || ApiError::NotFound("no such tile".into());
    let ty = file.strip_suffix(".png").ok_or_else(bad)?;
    let parse = |s: &str| s.parse::<u32>().map_err(|_| bad());
    let (n, zoom, tx, ty) = (parse(&n)?, parse(&zoom)?, parse(&tx)?, parse(ty)?);
    if !(2..=state.config.max_n).contains(&n) || zoom > state.config.max_zoom {
        return Err(bad());
    }
    let addr = TileAddress::new(n, zoom, tx, ty).map_err(|_| bad())?;
    let map = ColorMap::by_name(params.get("map").map(String::as_str).unwrap_or("gray"))?;
    let bytes = state.tile(addr, map).await?;
    Ok(png_response(&bytes, &headers))
}

fn query_f64(params: &HashMap<String, String>, key: &str, default: Option<f64>) -> std::result::Result<f64, ApiError> {
    match params.get(key) {
        Some(v) => v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ApiError::BadRequest(format!("{key}: not a number: {v:?}"))),
        None => default.ok_or_else(|| ApiError::BadRequest(format!("missing query parameter {key}"))),
    }
}

fn query_u32(params: &HashMap<String, String>, key: &str, default: u32) -> std::result::Result<u32, ApiError> {
    match params.get(key) {
        Some(v) => v.parse().map_err(|_| ApiError::BadRequest(format!("{key}: not an integer: {v:?}"))),
        None => Ok(default),
    }
}

async fn get_dragon(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> std::result::Result<Response, ApiError> {
    let q = Complex64::new(query_f64(&params, "re", None)?, query_f64(&params, "im", Some(0.0))?);
    let depth = query_u32(&params, "depth", 20)?;
    let size = query_u32(&params, "size", state.config.tile_size)?;
    if depth > MAX_DRAGON_DEPTH {
        return Err(ApiError::BadRequest(format!("depth must be at most {MAX_DRAGON_DEPTH}")));
    }
    if !(1..=2048).contains(&size) {
        return Err(ApiError::BadRequest("size must be in 1..=2048".into()));
    }
    if q.norm() >= 1.0 {
        return Err(ApiError::BadRequest(format!("|q| = {} >= 1: the dragon maps are not contractions", q.norm())));
    }
    check_modulus(q)?;
    let map = ColorMap::by_name(params.get("map").map(String::as_str).unwrap_or("gray"))?;
    let query = DragonQuery::new(q)?;
    let bytes = run_on(&state.render_pool, move || {
        render::render_dragon(query, depth, size, &map).and_then(|img| render::encode_png(&img))
    })
    .await??;
    Ok(png_response(&bytes, &headers))
}

async fn get_member(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
) -> std::result::Result<Response, ApiError> {
    let q = Complex64::new(query_f64(&params, "re", None)?, query_f64(&params, "im", Some(0.0))?);
    let eps = query_f64(&params, "eps", Some(1e-6))?;
    let max_depth = query_u32(&params, "max_depth", 96)?;
    let budget = state.config.node_budget;
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = cancel.clone();
    let (tx, rx) = tokio::sync::oneshot::channel();
    state.member_pool.spawn(move || {
        let _ = tx.send(member_query(q, eps, max_depth, budget, Some(&flag)));
    });
    let mut rx = rx;
    let verdict = match tokio::time::timeout(state.config.request_timeout, &mut rx).await {
        Ok(r) => r,
        Err(_) => {
            // deadline: the search stops at its next check and reports undecided
            cancel.store(true, std::sync::atomic::Ordering::Relaxed);
            rx.await
        }
    }
    .map_err(|_| ApiError::Internal("membership worker dropped the job".into()))??;
    Ok(json_response(verdict_json(&verdict)))
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    let listen = config.listen;
    let state = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("lwroots: serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
