// Timing the O(d log d) k-support prox against the reference search, and the
// fitted growth exponent.
//
// `cargo run --release --example bench`

use boxnorm::cli::{bench_prox, scaling_exponent, BenchOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let opts = BenchOptions {
        sizes: vec![256, 512, 1024, 2048],
        runs: 3,
        warmup: 1,
        ..BenchOptions::default()
    };
    let rows = bench_prox(&opts).map_err(|f| f.message)?;
    println!(
        "{:>6} {:>5} {:>12} {:>12}",
        "d", "k", "fast (s)", "reference (s)"
    );
    for r in &rows {
        println!(
            "{:>6} {:>5} {:>12.3e} {:>12.3e}",
            r.d, r.k, r.fast_seconds, r.reference_seconds
        );
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.fast_seconds)).collect();
    println!(
        "fast prox time grows like d^{:.2}",
        scaling_exponent(&points)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
