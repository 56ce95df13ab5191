// Orthogonally invariant matrix norms: thin SVD, spectral norms and proxes,
// and the cluster norm written as a spectral box-norm.
//
// `cargo run --example spectral`

use ndarray::array;

use boxnorm::spectral::{
    cluster_to_box, spectral_box_split, spectral_norm, spectral_prox, ClusterParams, SpectralNorm,
    SpectralPenalty,
};
use boxnorm::svd::thin_svd;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let w = array![
        [4.0, 0.0, 1.0],
        [0.0, 2.0, 0.0],
        [1.0, 0.0, 0.5],
        [0.0, 1.0, 0.0]
    ];
    let svd = thin_svd(w.view())?;
    println!("singular values {:.4?}", svd.sigma);

    for (name, norm) in [
        ("trace", SpectralNorm::Trace),
        ("frobenius", SpectralNorm::Frobenius),
        ("ksup k=2", SpectralNorm::KSupport(2)),
    ] {
        println!("{name:>10}: {:.6}", spectral_norm(w.view(), &norm)?);
    }

    // Three tasks in two clusters.
    let cluster = ClusterParams::new(0.5, 5.0, 2, 0.0)?;
    let params = cluster_to_box(&cluster, 3)?;
    println!(
        "cluster norm as box: a={} b={} c={}",
        params.a, params.b, params.c
    );
    println!(
        "{:>10}: {:.6}",
        "cluster",
        spectral_norm(w.view(), &SpectralNorm::Box(params))?
    );

    let shrunk = spectral_prox(w.view(), &SpectralPenalty::SqBox(params), 1.0)?;
    println!(
        "prox singular values {:.4?}",
        thin_svd(shrunk.view())?.sigma
    );

    let (low, high) = spectral_box_split(w.view(), &params)?;
    let err = (&low + &high - &w)
        .mapv(f64::abs)
        .fold(0.0f64, |m, &x| m.max(x));
    assert!(err < 1e-10);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
