//! Lists the normalized Littlewood polynomials with `n` terms in Gray-code
//! order, together with their images under `z -> 1/z` and `z -> -z`.
//!
//!     cargo run --example enumerate_littlewood -- 5

use lwroots::littlewood::family_size;
use lwroots::{enumerate, Complex64};

fn main() -> lwroots::Result<()> {
    let n: u32 = std::env::args().nth(1).map(|s| s.parse().expect("n must be an integer")).unwrap_or(4);
    println!("{} polynomials with {n} terms (signs listed from a_0 up)", family_size(n));
    println!("{:>5}  {:<w$}  {:<w$}  {:<w$}  p(1)", "index", "signs", "reverse", "negate", w = n as usize);
    for p in enumerate(n)? {
        println!(
            "{:>5}  {:<w$}  {:<w$}  {:<w$}  {}",
            p.index(),
            p.to_string(),
            p.reverse().to_string(),
            p.negate_variable().to_string(),
            p.evaluate(Complex64::new(1.0, 0.0)).re,
            w = n as usize
        );
    }
    Ok(())
}
