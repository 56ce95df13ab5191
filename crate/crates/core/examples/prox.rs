// Proximity operators of the squared box-norm and k-support norm, the
// O(d log d) routine against the slow reference, and the Moreau split.
//
// `cargo run --example prox`

use boxnorm::prox::{
    grad_sq_box, moreau_split, prox_sq_box, prox_sq_ksup, prox_sq_ksup_reference, ProxConfig,
};
use boxnorm::vecnorm::BoxParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = [3.0, -2.0, 1.5, 0.2, -0.1, 0.0];
    let cfg = ProxConfig::new(0.5)?;

    let params = BoxParams::from_k(0.05, 1.0, 2.0, w.len())?;
    let (x, cert) = prox_sq_box(&w, &params, &cfg)?;
    println!("box prox   = {x:.4?}");
    println!("           {} entries at b, {} at a", cert.q, cert.ell);

    let fast = prox_sq_ksup(&w, 2, &cfg)?;
    let slow = prox_sq_ksup_reference(&w, 2, cfg.lambda)?;
    let gap = fast
        .iter()
        .zip(&slow)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("ksup prox  = {fast:.4?}  (reference differs by {gap:.1e})");
    assert!(gap < 1e-10);

    // ‖w‖²_box = ‖u‖²/a + ‖z‖²_(k)/(b - a), and its gradient is 2(w - z)/a.
    let (u, z) = moreau_split(&w, &params)?;
    let g = grad_sq_box(&w, &params)?;
    println!("u = {u:.4?}\nz = {z:.4?}\ngrad = {g:.4?}");
    for i in 0..w.len() {
        assert!((u[i] + z[i] - w[i]).abs() < 1e-12);
        assert!((g[i] - 2.0 * (w[i] - z[i]) / params.a).abs() < 1e-9);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
