//! Places `X_n` near `q` beside the dragon `D_q`.
//!
//!     cargo run --release --example compare_panel -- 0.375453 0.544825 0.010 panel.png

use lwroots::density::load_or_solve;
use lwroots::render::{compare_panel, encode_png, ColorMap};
use lwroots::Complex64;

fn main() -> lwroots::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let re = args.first().map_or(0.594, |s| s.parse().expect("re"));
    let im = args.get(1).map_or(0.254, |s| s.parse().expect("im"));
    let window = args.get(2).map_or(0.016, |s| s.parse().expect("window"));
    let out = args.get(3).cloned().unwrap_or_else(|| "panel.png".into());
    let threads = std::thread::available_parallelism().map(|t| t.get()).unwrap_or(1);

    let roots = load_or_solve(18, threads, Some(std::path::Path::new("lwroots-cache")))?;
    let panel = compare_panel(Complex64::new(re, im), window, &roots, 20, 512, &ColorMap::gray(), threads)?;
    std::fs::write(&out, encode_png(&panel)?)?;
    println!("wrote {out} ({}x{})", panel.width, panel.height);
    Ok(())
}
