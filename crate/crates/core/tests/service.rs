use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use lwroots::density::{cache_path, load_or_solve};
use lwroots::render::ColorMap;
use lwroots::service::{render_tile, router, tile_grid, AppState, ServiceConfig, TileAddress};
use sha2::{Digest, Sha256};
use tower::ServiceExt;

fn config(dir: &Path) -> ServiceConfig {
    ServiceConfig {
        cache_dir: dir.to_path_buf(),
        render_threads: 2,
        member_threads: 2,
        ..ServiceConfig::default()
    }
}

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

async fn get(state: &Arc<AppState>, uri: &str) -> Reply {
    get_with(state, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn get_with(state: &Arc<AppState>, req: Request<Body>) -> Reply {
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, body }
}

fn decode(bytes: &[u8]) -> (u32, u32, Vec<u8>) {
    let mut reader = png::Decoder::new(std::io::Cursor::new(bytes.to_vec())).read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}

#[tokio::test(flavor = "multi_thread")]
async fn meta_lists_cached_term_counts() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(config(dir.path())).unwrap());
    let meta = get(&state, "/api/meta").await;
    assert_eq!(meta.status, StatusCode::OK);
    assert_eq!(meta.headers[header::CONTENT_TYPE], "application/json");
    assert_eq!(meta.json()["cached_n"], serde_json::json!([]));
    assert_eq!(meta.json()["limits"]["tile_size"], 256);

    load_or_solve(12, 2, Some(dir.path())).unwrap();
    assert_eq!(get(&state, "/api/meta").await.json()["cached_n"], serde_json::json!([12]));
}

#[tokio::test(flavor = "multi_thread")]
async fn unknown_routes_are_json_404() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(config(dir.path())).unwrap());
    for uri in ["/nope", "/api/tiles/12/0/0", "/api/tiles/12/0/0/0.jpg", "/api/tiles/x/0/0/0.png"] {
        let r = get(&state, uri).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        assert!(r.json()["error"].is_string());
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn tiles_of_a_precomputed_family() {
    let dir = tempfile::tempdir().unwrap();
    let roots = load_or_solve(12, 4, Some(dir.path())).unwrap();
    let cfg = config(dir.path());
    let state = Arc::new(AppState::new(cfg.clone()).unwrap());

    // the zoom 0 tile sees every root
    let root = TileAddress::new(12, 0, 0, 0).unwrap();
    assert_eq!(tile_grid(&roots, &root, cfg.tile_size).inside(), 22_528);

    let first = get(&state, "/api/tiles/12/0/0/0.png").await;
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.headers[header::CONTENT_TYPE], "image/png");
    assert_eq!(first.body, render_tile(&roots, &root, cfg.tile_size, &ColorMap::gray()).unwrap());
    let (w, h, _) = decode(&first.body);
    assert_eq!((w, h), (256, 256));

    // repeated requests (now served from the tile cache) are byte-identical
    let again = get(&state, "/api/tiles/12/0/0/0.png").await;
    assert_eq!(again.body, first.body);
    let tag = format!("\"{}\"", hex::encode(Sha256::digest(&first.body)));
    assert_eq!(first.headers[header::ETAG], tag.as_str());
    assert_eq!(again.headers[header::ETAG], tag.as_str());
    let fresh = Arc::new(AppState::new(config(dir.path())).unwrap());
    assert_eq!(get(&fresh, "/api/tiles/12/0/0/0.png").await.body, first.body);

    let req = Request::get("/api/tiles/12/0/0/0.png").header(header::IF_NONE_MATCH, tag).body(Body::empty()).unwrap();
    let cached = get_with(&state, req).await;
    assert_eq!(cached.status, StatusCode::NOT_MODIFIED);
    assert!(cached.body.is_empty());

    let ember = get(&state, "/api/tiles/12/0/0/0.png?map=ember").await;
    assert_eq!(ember.status, StatusCode::OK);
    assert_ne!(ember.body, first.body);
    assert_eq!(get(&state, "/api/tiles/12/0/0/0.png?map=plaid").await.status, StatusCode::BAD_REQUEST);

    for uri in ["/api/tiles/12/0/1/0.png", "/api/tiles/12/1/0/2.png", "/api/tiles/30/0/0/0.png", "/api/tiles/12/17/0/0.png"] {
        assert_eq!(get(&state, uri).await.status, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[test]
fn zoom_one_tiles_partition_zoom_zero() {
    let roots = load_or_solve(12, 4, None).unwrap();
    let size = 128;
    let parent = tile_grid(&roots, &TileAddress::new(12, 0, 0, 0).unwrap(), size);
    let mut summed = vec![0u32; (size * size) as usize];
    for ty in 0..2 {
        for tx in 0..2 {
            let child = tile_grid(&roots, &TileAddress::new(12, 1, tx, ty).unwrap(), size);
            for y in 0..size {
                for x in 0..size {
                    let (px, py) = ((tx * size + x) / 2, (ty * size + y) / 2);
                    summed[(py * size + px) as usize] += child.get(x, y);
                }
            }
        }
    }
    assert_eq!(summed, parent.counts());
}

#[test]
fn mirror_tiles() {
    let roots = load_or_solve(12, 4, None).unwrap();
    let size = 128;
    let left = tile_grid(&roots, &TileAddress::new(12, 1, 0, 0).unwrap(), size);
    let right = tile_grid(&roots, &TileAddress::new(12, 1, 1, 0).unwrap(), size);
    let below = tile_grid(&roots, &TileAddress::new(12, 1, 0, 1).unwrap(), size);
    assert!(left.total() > 0);
    for y in 0..size {
        for x in 0..size {
            assert_eq!(left.get(x, y), right.get(size - 1 - x, y));
            assert_eq!(left.get(x, y), below.get(x, size - 1 - y));
        }
    }
    let (_, _, a) = decode(&render_tile(&roots, &TileAddress::new(12, 1, 0, 0).unwrap(), size, &ColorMap::gray()).unwrap());
    let (_, _, b) = decode(&render_tile(&roots, &TileAddress::new(12, 1, 1, 0).unwrap(), size, &ColorMap::gray()).unwrap());
    for y in 0..size as usize {
        for x in 0..size as usize {
            let i = (y * size as usize + x) * 3;
            let j = (y * size as usize + size as usize - 1 - x) * 3;
            assert_eq!(a[i..i + 3], b[j..j + 3]);
        }
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn uncomputed_families() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.lazy_max_n = 10;
    cfg.compute_wait = Duration::ZERO;
    let state = Arc::new(AppState::new(cfg).unwrap());

    let missing = get(&state, "/api/tiles/12/0/0/0.png").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert!(missing.json()["error"].as_str().unwrap().contains("not precomputed"));

    let busy = get(&state, "/api/tiles/10/0/0/0.png").await;
    assert_eq!(busy.status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(busy.headers[header::RETRY_AFTER], "2");

    // the solve started by that request finishes in the background
    let mut cached = false;
    for _ in 0..200 {
        if cache_path(dir.path(), 10).exists() && get(&state, "/api/meta").await.json()["computing_n"] == serde_json::json!([]) {
            cached = true;
            break;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    assert!(cached);
    assert_eq!(get(&state, "/api/tiles/10/0/0/0.png").await.status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread")]
async fn lazy_solves_are_served_when_quick() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(config(dir.path())).unwrap());
    let r = get(&state, "/api/tiles/8/2/1/3.png").await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(cache_path(dir.path(), 8).exists());
}

#[tokio::test(flavor = "multi_thread")]
async fn dragon_images() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(config(dir.path())).unwrap());
    let r = get(&state, "/api/dragon?re=0.5&im=0&depth=20&size=256").await;
    assert_eq!(r.status, StatusCode::OK);
    let (w, h, px) = decode(&r.body);
    assert_eq!((w, h), (256, 256));
    let lit_rows: std::collections::BTreeSet<usize> =
        px.chunks(3).enumerate().filter(|(_, p)| p.iter().any(|&v| v != 0)).map(|(i, _)| i / 256).collect();
    assert_eq!(lit_rows.into_iter().collect::<Vec<_>>(), vec![128]);
    assert_eq!(get(&state, "/api/dragon?re=0.5&im=0&depth=20&size=256").await.body, r.body);

    let zero = get(&state, "/api/dragon?re=0&im=0&size=64").await;
    let (_, _, px) = decode(&zero.body);
    assert_eq!(px.chunks(3).filter(|p| p.iter().any(|&v| v != 0)).count(), 1);

    for uri in [
        "/api/dragon?re=0.99&im=0",
        "/api/dragon?re=0.7&im=0.7",
        "/api/dragon?re=1.5",
        "/api/dragon?im=0.5",
        "/api/dragon?re=abc",
        "/api/dragon?re=0.5&depth=60",
        "/api/dragon?re=0.5&size=0",
    ] {
        let r = get(&state, uri).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(r.json()["error"].is_string());
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn membership_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(config(dir.path())).unwrap());

    let half = get(&state, "/api/member?re=0.5&im=0&eps=1e-9").await;
    assert_eq!(half.status, StatusCode::OK);
    let v = half.json();
    assert_eq!(v["status"], "member");
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
    let w = v["witness"].as_str().unwrap();
    assert!(w.starts_with("+-") && w[1..].chars().all(|c| c == '-'));

    let low = get(&state, "/api/member?re=0.3&im=0").await.json();
    assert_eq!(low["status"], "not_member");
    assert!(low["witness"].is_null());

    let fig = get(&state, "/api/member?re=0.594&im=0.254").await.json();
    assert_eq!(fig["status"], "not_member");

    let golden = get(&state, "/api/member?re=0.6180339887").await.json();
    assert_eq!(golden["status"], "member");

    for uri in ["/api/member?re=1&im=0", "/api/member?re=0&im=-1.5", "/api/member?re=0.99", "/api/member?im=0.2", "/api/member?re=0.5&eps=0"] {
        let r = get(&state, uri).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(r.json()["error"].is_string());
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn membership_deadline_reports_undecided() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.request_timeout = Duration::ZERO;
    cfg.node_budget = u64::MAX;
    let state = Arc::new(AppState::new(cfg).unwrap());
    // no witness can exist above this precision at this depth, so only the deadline ends the search
    let r = get(&state, "/api/member?re=0.7&im=0.3&eps=1e-300&max_depth=120").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["status"], "undecided");
}
