//! Orthogonally invariant matrix norms built from vector norms on the
//! singular values, their proximity operators, and the cluster-norm
//! parameter mapping.

use ndarray::{Array2, ArrayView2};

use crate::error::{param, Result};
use crate::prox::{moreau_split, prox_sq_box, prox_sq_ksup, ProxConfig};
use crate::svd::thin_svd;
use crate::vecnorm::{box_norm, k_support_norm, BoxParams, KSupportParams};

/// Which norm to apply to the singular values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralNorm {
    Box(BoxParams),
    KSupport(usize),
    Trace,
    Frobenius,
}

/// Penalty whose proximity operator [`spectral_prox`] evaluates.
///
/// `SqBox` and `SqKSupport` stand for `(λ/2)‖·‖²`, `Trace` for `λ‖·‖_tr` and
/// `ElasticNet` for `λ(‖·‖_tr + (γ/2)‖·‖²_F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralPenalty {
    SqBox(BoxParams),
    SqKSupport(usize),
    Trace,
    ElasticNet { gamma: f64 },
}

/// Norm of a singular value vector.
pub fn norm_of_spectrum(sigma: &[f64], norm: &SpectralNorm) -> Result<f64> {
    match norm {
        SpectralNorm::Box(p) => Ok(box_norm(sigma, p)?.0),
        SpectralNorm::KSupport(k) => Ok(k_support_norm(sigma, &KSupportParams::new(*k))?.0),
        SpectralNorm::Trace => Ok(sigma.iter().sum()),
        SpectralNorm::Frobenius => Ok(sigma.iter().map(|s| s * s).sum::<f64>().sqrt()),
    }
}

pub fn spectral_norm(w: ArrayView2<'_, f64>, norm: &SpectralNorm) -> Result<f64> {
    let f = thin_svd(w)?;
    norm_of_spectrum(&f.sigma, norm)
}

/// Vector prox of `penalty` applied to a nonincreasing nonnegative spectrum.
pub fn prox_spectrum(sigma: &[f64], penalty: &SpectralPenalty, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return param(format!("prox lambda must be positive, got {lambda}"));
    }
    match penalty {
        SpectralPenalty::SqBox(p) => Ok(prox_sq_box(sigma, p, &ProxConfig::new(lambda)?)?.0),
        SpectralPenalty::SqKSupport(k) => prox_sq_ksup(sigma, *k, &ProxConfig::new(lambda)?),
        SpectralPenalty::Trace => Ok(sigma.iter().map(|s| (s - lambda).max(0.0)).collect()),
        SpectralPenalty::ElasticNet { gamma } => {
            if !(*gamma >= 0.0 && gamma.is_finite()) {
                return param(format!(
                    "elastic net gamma must be nonnegative, got {gamma}"
                ));
            }
            let scale = 1.0 / (1.0 + lambda * gamma);
            Ok(sigma
                .iter()
                .map(|s| (s - lambda).max(0.0) * scale)
                .collect())
        }
    }
}

/// `U diag(prox(σ)) Vᵀ`.
pub fn spectral_prox(
    w: ArrayView2<'_, f64>,
    penalty: &SpectralPenalty,
    lambda: f64,
) -> Result<Array2<f64>> {
    let f = thin_svd(w)?;
    let shrunk = prox_spectrum(&f.sigma, penalty, lambda)?;
    Ok(f.reconstruct_with(&shrunk))
}

/// Box parameters for `n` coordinates restricted to the first `r ≤ n` when
/// the remaining `n - r` are known to be zero (e.g. a `d × T` matrix with
/// `d < T` has `T - r` structural zero singular values). Zero coordinates
/// take `θ = a` unless the nonzero ones are already at `b`, so the budget
/// shrinks by `(n - r) a` and is clipped back into `[r a, r b]`.
pub fn restrict_box(params: &BoxParams, n: usize, r: usize) -> Result<BoxParams> {
    if r == 0 || r > n {
        return param(format!("cannot restrict {n} coordinates to {r}"));
    }
    let c = params.budget_for(n)?;
    let (a, b) = (params.a, params.b);
    let reduced = (c - (n - r) as f64 * a).clamp(r as f64 * a, r as f64 * b);
    BoxParams::new(a, b, reduced)
}

/// Cluster-norm weights. `eps_m` weighs the mean penalty `tr(W U Wᵀ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub eps_b: f64,
    pub eps_w: f64,
    pub clusters: usize,
    pub eps_m: f64,
}

impl ClusterParams {
    pub fn new(eps_b: f64, eps_w: f64, clusters: usize, eps_m: f64) -> Result<Self> {
        let cp = Self {
            eps_b,
            eps_w,
            clusters,
            eps_m,
        };
        if !(eps_b > 0.0 && eps_b.is_finite() && eps_w.is_finite()) {
            return param(format!("eps_b must be positive, got {eps_b}"));
        }
        if eps_w < eps_b {
            return param(format!("need eps_w >= eps_b, got {eps_w} < {eps_b}"));
        }
        if !(eps_m >= 0.0 && eps_m.is_finite()) {
            return param(format!("eps_m must be nonnegative, got {eps_m}"));
        }
        if clusters == 0 {
            return param("cluster count must be at least 1");
        }
        Ok(cp)
    }
}

/// The spectral box-norm parameters equal to the cluster norm on `tasks`
/// tasks: `a = 1/ε_w`, `b = 1/ε_b`, `c = (T - Q + 1)/ε_w + (Q - 1)/ε_b`,
/// so that `k = Q - 1`.
pub fn cluster_to_box(cp: &ClusterParams, tasks: usize) -> Result<BoxParams> {
    let cp = ClusterParams::new(cp.eps_b, cp.eps_w, cp.clusters, cp.eps_m)?;
    if cp.clusters > tasks {
        return param(format!("{} clusters exceed {tasks} tasks", cp.clusters));
    }
    let (a, b) = (1.0 / cp.eps_w, 1.0 / cp.eps_b);
    let q = cp.clusters as f64;
    BoxParams::new(a, b, (tasks as f64 - q + 1.0) * a + (q - 1.0) * b)
}

/// Spectral Moreau split `W = (W - Z) + Z`, with `Z` the spectral prox of
/// `(a/(2(b-a)))‖·‖²_(k)` at `W`. Both parts share the singular vectors of `W`.
pub fn spectral_box_split(
    w: ArrayView2<'_, f64>,
    params: &BoxParams,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let f = thin_svd(w)?;
    let (u, z) = moreau_split(&f.sigma, params)?;
    Ok((f.reconstruct_with(&u), f.reconstruct_with(&z)))
}
