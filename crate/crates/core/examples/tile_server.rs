//! Precomputes a root cache and serves the tile, dragon and membership API.
//!
//!     cargo run --release --example tile_server -- 127.0.0.1:8080 14
//!     curl -s localhost:8080/api/meta
//!     curl -so tile.png localhost:8080/api/tiles/14/1/0/0.png
//!     curl -s 'localhost:8080/api/member?re=0.5&im=0&eps=1e-9'

use lwroots::density::load_or_solve;
use lwroots::service::{serve, ServiceConfig};

fn main() -> lwroots::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = ServiceConfig::default();
    if let Some(listen) = args.next() {
        config.listen = listen.parse().expect("listen address HOST:PORT");
    }
    let n: u32 = args.next().map(|s| s.parse().expect("n must be an integer")).unwrap_or(14);
    load_or_solve(n, config.render_threads, Some(&config.cache_dir))?;
    println!("roots for n={n} cached in {}", config.cache_dir.display());
    tokio::runtime::Runtime::new()?.block_on(serve(config))
}
