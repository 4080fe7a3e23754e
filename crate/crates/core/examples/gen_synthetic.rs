//! Writes a synthetic steel-like CSV to stdout.
//!
//! `cargo run -p steelpower --example gen_synthetic -- [rows] [seed]`

fn main() {
    let mut args = std::env::args().skip(1);
    let rows = args.next().and_then(|s| s.parse().ok()).unwrap_or(35_040);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    print!("{}", steelpower::synthetic::steel_like_csv(rows, seed));
}
