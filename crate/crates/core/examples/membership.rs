//! Certified membership verdicts for a few parameters, with witnesses.
//!
//!     cargo run --release --example membership -- 0.62 0.41

use lwroots::dragon::{closure_member, connectivity_probe, DragonQuery};
use lwroots::service::verdict_json;
use lwroots::Complex64;

fn main() -> lwroots::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("numbers")).collect();
    let mut qs = vec![
        Complex64::new(0.3, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.6180339887, 0.0),
        Complex64::new(0.375453, 0.544825),
        Complex64::new(0.594, 0.254),
    ];
    if let [re, im] = args[..] {
        qs = vec![Complex64::new(re, im)];
    }
    for q in qs {
        let zero = closure_member(q, 1e-6, 96)?;
        let linked = connectivity_probe(DragonQuery::new(q)?, 1e-6, 96)?;
        println!("q = {q}");
        println!("  0 in D_q:        {}", verdict_json(&zero));
        println!("  D_q connected:   {} ({} nodes)", linked.status, linked.nodes_explored);
    }
    Ok(())
}
