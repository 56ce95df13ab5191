// Centered regularization: fit `W = V + z 1ᵀ` and penalize only `V`, so a
// shared offset across columns costs nothing.
//
// `cargo run --example centered`

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use boxnorm::losses::{MaskedSquare, ObservationMask};
use boxnorm::solver::{solve_from_zero, Penalty, SolveConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (d, t) = (12, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // Every column is the same offset plus a small perturbation.
    let offset: Vec<f64> = (0..d).map(|_| rng.gen_range(2.0..4.0)).collect();
    let truth = Array2::from_shape_fn((d, t), |(i, _)| offset[i] + rng.gen_range(-0.1..0.1));
    let cells: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..t).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(0.6))
        .collect();
    let loss = MaskedSquare(ObservationMask::from_cells(truth.view(), &cells)?);

    let plain = solve_from_zero(&loss, &SolveConfig::synthetic(2.0, Penalty::Trace))?;
    let cfg = SolveConfig {
        centered: true,
        ..SolveConfig::synthetic(2.0, Penalty::Trace)
    };
    let centered = solve_from_zero(&loss, &cfg)?;

    let err = |w: &Array2<f64>| (w - &truth).mapv(|x| x * x).sum().sqrt();
    println!("plain    error {:.4}", err(&plain.w_hat));
    println!("centered error {:.4}", err(&centered.w_hat));
    println!(
        "recovered offset {:.3?}",
        centered.z_hat.as_ref().unwrap().to_vec()
    );
    assert!(err(&centered.w_hat) < err(&plain.w_hat));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
