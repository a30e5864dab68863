//! Solves one polynomial with both iterations, then a whole family.
//!
//!     cargo run --release --example solve_roots -- +-+-+++ 14

use std::time::Instant;

use lwroots::{solve, solve_all, solve_oracle, SignVector};

fn main() -> lwroots::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: SignVector = args.next().unwrap_or_else(|| "-++".into()).parse()?;
    let n: u32 = args.next().map(|s| s.parse().expect("n must be an integer")).unwrap_or(12);

    let fast = solve(p, None)?;
    let oracle = solve_oracle(p)?;
    println!("{p}: residual {:.2e} (Aberth), {:.2e} (Durand-Kerner)", fast.residual, oracle.residual);
    for z in &fast.roots {
        let nearest = oracle.roots.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
        println!("  {:+.15} {:+.15}i   |z| = {:.12}   oracle gap {nearest:.1e}", z.re, z.im, z.norm());
    }

    let threads = std::thread::available_parallelism().map(|t| t.get()).unwrap_or(1);
    let start = Instant::now();
    let family = solve_all(n, threads)?;
    let (lo, hi) = family.roots().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.norm()), hi.max(z.norm())));
    println!(
        "X_{n}: {} roots in {:.2} s on {threads} threads, {lo:.6} <= |z| <= {hi:.6}",
        family.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
