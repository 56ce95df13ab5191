// Norms defined by a finite set of diagonal weightings: the dual through its
// vertices, and the primal group-lasso-with-overlap value found numerically.
// With all groups of size at most k this recovers the k-support norm.
//
// `cargo run --example overlap`

use boxnorm::vecnorm::{
    dual_k_support_norm, groups_up_to, k_support_norm, overlap_group_lasso_oracle,
    polyhedral_dual_norm, KSupportParams, VertexSet,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = [1.5, -0.4, 0.9, 0.1];
    let groups = groups_up_to(w.len(), 2);
    println!("{} groups of size at most 2", groups.len());

    let vertices = VertexSet::from_groups(w.len(), &groups)?;
    let dual = polyhedral_dual_norm(&w, &vertices)?;
    let closed = dual_k_support_norm(&w, &KSupportParams::new(2))?;
    println!("dual via vertices {dual:.6}, closed form {closed:.6}");
    assert!((dual - closed).abs() < 1e-10);

    let primal = overlap_group_lasso_oracle(&w, &groups, 20_000)?;
    let exact = k_support_norm(&w, &KSupportParams::new(2))?.0;
    println!("overlap infimum {primal:.6}, k-support norm {exact:.6}");
    assert!((primal - exact).abs() < 1e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
