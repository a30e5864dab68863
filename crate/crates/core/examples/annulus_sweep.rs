//! Sweeps the annulus `2^(-1/4) <= |q| <= 0.85` and a disk of
//! radius 0.45, reporting the verdict counts and the hardest search.
//!
//!     cargo run --release --example annulus_sweep -- 256

use std::collections::BTreeMap;

use lwroots::dragon::{member_zero, DragonQuery};
use lwroots::Complex64;

fn main() -> lwroots::Result<()> {
    let samples: usize = std::env::args().nth(1).map(|s| s.parse().expect("sample count")).unwrap_or(128);
    let r0 = 2f64.powf(-0.25);
    let rings: [(&str, f64, f64, f64); 2] = [("annulus", r0, 0.85, 1e-3), ("inner disk", 0.05, 0.45, 1e-6)];
    for (label, lo, hi, eps) in rings {
        let mut tally = BTreeMap::new();
        let mut hardest = (0, Complex64::new(0.0, 0.0));
        for k in 0..samples {
            // golden-angle spiral
            let r = lo + (hi - lo) * (k as f64 + 0.5) / samples as f64;
            let q = Complex64::from_polar(r, k as f64 * 2.399963229728653);
            let v = member_zero(DragonQuery::new(q)?, eps, 96)?;
            *tally.entry(v.status.as_str()).or_insert(0) += 1;
            if v.nodes_explored > hardest.0 {
                hardest = (v.nodes_explored, q);
            }
        }
        println!("{label} {lo:.4} <= |q| <= {hi}: {tally:?}; hardest {} nodes at q = {:.6}", hardest.0, hardest.1);
    }
    Ok(())
}
