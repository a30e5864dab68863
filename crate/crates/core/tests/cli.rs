use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use lwroots::cli::{parse_complex, parse_size, run_with, EXIT_DATA, EXIT_IO, EXIT_SOFTWARE, EXIT_USAGE};
use lwroots::density::{cache_path, cache_read};
use lwroots::service::{router, AppState, ServiceConfig};
use tower::ServiceExt;

fn lwroots(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lwroots").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn decode(path: &Path) -> (u32, u32, Vec<u8>) {
    let file = std::fs::File::open(path).unwrap();
    let mut reader = png::Decoder::new(std::io::BufReader::new(file)).read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}

#[test]
fn argument_parsers() {
    assert_eq!(parse_complex("0.5,-0.25").unwrap(), lwroots::Complex64::new(0.5, -0.25));
    assert!(parse_complex("0.5").is_err());
    assert!(parse_complex("a,b").is_err());
    assert_eq!(parse_size("640x480").unwrap(), (640, 480));
    assert!(parse_size("0x4").is_err());
    assert!(parse_size("64").is_err());
}

#[test]
fn member_exit_codes() {
    let (code, out, _) = lwroots(&["member", "--q", "0.5,0", "--eps", "1e-9"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "member");
    let (code, out, _) = lwroots(&["member", "--q", "0.3,0"]);
    assert_eq!(code, 1);
    assert!(out.contains("\"not_member\""));
    let (code, _, _) = lwroots(&["member", "--q", "0.7,0.3", "--eps", "1e-300", "--max-depth", "40"]);
    assert_eq!(code, 2);
}

#[test]
fn usage_errors() {
    assert_eq!(lwroots(&["--bogus"]).0, EXIT_USAGE);
    assert_eq!(lwroots(&[]).0, EXIT_USAGE);
    assert_eq!(lwroots(&["member"]).0, EXIT_USAGE);
    assert_eq!(lwroots(&["member", "--q", "0.3,x"]).0, EXIT_DATA);
    let (code, _, err) = lwroots(&["member", "--q", "1.2,0"]);
    assert_eq!(code, EXIT_SOFTWARE);
    assert!(err.contains("unit disk") || err.contains("|q|"));
    let (code, out, _) = lwroots(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["precompute", "render", "dragon", "member", "compare", "serve"] {
        assert!(out.contains(sub), "{sub}");
    }
}

#[test]
fn member_output_matches_the_service() {
    let (_, cli_out, _) = lwroots(&["member", "--q", "0.5,0", "--eps", "1e-9", "--max-depth", "64"]);
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig { cache_dir: dir.path().to_path_buf(), render_threads: 1, member_threads: 1, ..Default::default() };
    let state = Arc::new(AppState::new(cfg).unwrap());
    let rt = tokio::runtime::Runtime::new().unwrap();
    let body = rt.block_on(async {
        let req = Request::get("/api/member?re=0.5&im=0&eps=1e-9&max_depth=64").body(Body::empty()).unwrap();
        let resp = router(state).oneshot(req).await.unwrap();
        resp.into_body().collect().await.unwrap().to_bytes().to_vec()
    });
    assert_eq!(cli_out.trim_end().as_bytes(), &body[..]);
}

#[test]
fn precompute_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache_s = cache.to_str().unwrap();
    let (code, _, err) = lwroots(&["--threads", "2", "precompute", "--n", "10", "--cache", cache_s]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(cache_read(10, &cache_path(&cache, 10)).unwrap().len(), 9 * 512);

    let png = dir.path().join("x10.png");
    let pgm = dir.path().join("x10.pgm");
    let args = ["render", "--n", "10", "--size", "512x512", "--cache", cache_s, "--out", png.to_str().unwrap(), "--pgm", pgm.to_str().unwrap()];
    assert_eq!(lwroots(&args).0, 0);
    let (w, h, px) = decode(&png);
    assert_eq!((w, h), (512, 512));
    let at = |x: usize, y: usize| &px[(y * 512 + x) * 3..(y * 512 + x) * 3 + 3];
    assert!(px.iter().any(|&v| v != 0));
    for y in 0..512 {
        for x in 0..512 {
            assert_eq!(at(x, y), at(511 - x, y));
            assert_eq!(at(x, y), at(x, 511 - y));
        }
    }
    assert!(std::fs::read_to_string(&pgm).unwrap().starts_with("P2\n512 512\n65535\n"));

    // a cache file for the wrong family is an I/O-class failure
    std::fs::copy(cache_path(&cache, 10), cache_path(&cache, 9)).unwrap();
    let args = ["render", "--n", "9", "--size", "64x64", "--cache", cache_s, "--out", png.to_str().unwrap()];
    assert_eq!(lwroots(&args).0, EXIT_IO);
}

#[test]
fn dragon_and_compare_images() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.png");
    let args = ["dragon", "--q", "0.375453,0.544825", "--depth", "16", "--size", "128", "--map", "ember", "--out", out.to_str().unwrap()];
    assert_eq!(lwroots(&args).0, 0);
    let (w, h, px) = decode(&out);
    assert_eq!((w, h), (128, 128));
    assert!(px.iter().any(|&v| v != 0));
    assert_eq!(lwroots(&["dragon", "--q", "1,0", "--out", out.to_str().unwrap()]).0, EXIT_SOFTWARE);

    let panel = dir.path().join("p.png");
    let args = ["compare", "--q", "0.375453,0.544825", "--window", "0.01", "--n", "12", "--depth", "16", "--size", "96", "--out", panel.to_str().unwrap()];
    assert_eq!(lwroots(&args).0, 0);
    let (w, h, _) = decode(&panel);
    assert_eq!((w, h), (194, 96));
}
