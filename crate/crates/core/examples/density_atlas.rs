//! Renders the root density of `X_n` for the whole set and for a zoomed
//! window, as PNG images plus the raw counts as PGM.
//!
//!     cargo run --release --example density_atlas -- 16 out/

use std::path::PathBuf;

use lwroots::density::{compute_density, Viewport};
use lwroots::render::{encode_pgm, encode_png, shade, ColorMap};
use lwroots::Complex64;

fn main() -> lwroots::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map(|s| s.parse().expect("n must be an integer")).unwrap_or(14);
    let out = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out)?;
    let threads = std::thread::available_parallelism().map(|t| t.get()).unwrap_or(1);
    let cache = out.join("cache");

    let views = [
        ("full", Viewport::full_set(1024, 1024)),
        ("edge", Viewport::new(Complex64::new(0.0, 1.0), 0.4, 1024, 768)?),
    ];
    for (name, view) in views {
        let grid = compute_density(n, &view, threads, Some(&cache))?;
        let png = out.join(format!("x{n}-{name}.png"));
        std::fs::write(&png, encode_png(&shade(&grid, &ColorMap::ember()))?)?;
        std::fs::write(out.join(format!("x{n}-{name}.pgm")), encode_pgm(&grid))?;
        println!("{}: {} roots in view, busiest pixel {}", png.display(), grid.inside(), grid.max_count());
    }
    Ok(())
}
