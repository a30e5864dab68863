//! Builds the dragon `D_q` at increasing depth and writes the final render.
//!
//!     cargo run --release --example dragon_attractor -- 0.375453 0.544825 dragon.png

use lwroots::dragon::{attractor, DragonQuery};
use lwroots::render::{default_attractor_viewport, default_dedup, encode_png, render_attractor, ColorMap};
use lwroots::Complex64;

fn main() -> lwroots::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let re = args.first().map_or(0.594, |s| s.parse().expect("re"));
    let im = args.get(1).map_or(0.254, |s| s.parse().expect("im"));
    let out = args.get(2).cloned().unwrap_or_else(|| "dragon.png".into());

    let query = DragonQuery::new(Complex64::new(re, im))?;
    println!("q = {}, points lie within {:.4} of 1", query.q(), query.bounding_radius());
    for depth in [4, 8, 12, 16] {
        let cloud = attractor(query, depth, 0.0)?;
        println!("depth {depth:>2}: {:>6} exact points, Hausdorff bound {:.2e}", cloud.points.len(), cloud.tail_radius);
    }
    let view = default_attractor_viewport(&query, 768, 768);
    let cloud = attractor(query, 32, default_dedup(&view))?;
    println!("depth 32 snapped to {:.1e}: {} points", cloud.dedup_resolution, cloud.points.len());
    std::fs::write(&out, encode_png(&render_attractor(&cloud, &view, &ColorMap::gray()))?)?;
    println!("wrote {out}");
    Ok(())
}
