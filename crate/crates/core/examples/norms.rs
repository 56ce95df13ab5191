// Box-norm and k-support norm of a vector, their duals, and the optimal
// weights that certify the box-norm value.
//
// `cargo run --example norms`

use boxnorm::vecnorm::{
    box_norm, dual_box_norm, dual_k_support_norm, k_support_norm, BoxParams, KSupportParams,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = [2.0, 1.0, 0.5];

    let (ksup, q) = k_support_norm(&w, &KSupportParams::new(2))?;
    let ksup_dual = dual_k_support_norm(&w, &KSupportParams::new(2))?;
    println!("‖w‖_(2) = {ksup:.6} with {q} leading entries kept whole");
    println!("dual    = {ksup_dual:.6}");
    assert!((ksup - 2.5).abs() < 1e-12);

    // a ≤ θ_i ≤ b and Σθ ≤ c, here with c = (b - a) k + d a for k = 2.
    let params = BoxParams::from_k(0.1, 1.0, 2.0, w.len())?;
    let (value, cert) = box_norm(&w, &params)?;
    println!("box norm = {value:.6}  theta = {:?}", cert.theta);
    let weighted: f64 = w.iter().zip(&cert.theta).map(|(x, t)| x * x / t).sum();
    assert!((weighted.sqrt() - value).abs() < 1e-12);

    // Hölder: ⟨w, u⟩ ≤ ‖w‖ ‖u‖_*.
    let u = [0.3, -1.2, 0.8];
    let dual = dual_box_norm(&u, &params)?;
    let inner: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
    println!("<w,u> = {inner:.4} <= {:.4}", value * dual);
    assert!(inner <= value * dual);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
