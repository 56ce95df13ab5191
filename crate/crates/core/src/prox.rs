//! Proximity operators of the squared box-norm and squared k-support norm.
//!
//! Throughout, `lambda` is the scale in `prox_{(λ/2)‖·‖²}`. A solver taking a
//! step `s` on the penalty `(λ/2)‖·‖²` calls the same routine with `s λ`.

use crate::error::{check_finite, input, param, Error, Result};
use crate::vecnorm::{
    solve_capped, BoxParams, KSupportParams, NormDecomposition, SortedMagnitudes, INTERP_RTOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxConfig {
    pub lambda: f64,
    /// Relative tolerance on `S(α) = c` below which a breakpoint is accepted
    /// as the root without interpolating.
    pub interp_tol: f64,
}

impl ProxConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        let cfg = Self {
            lambda,
            interp_tol: INTERP_RTOL,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return param(format!("prox lambda must be positive, got {}", self.lambda));
        }
        if !(self.interp_tol > 0.0 && self.interp_tol <= 1e-6) {
            return param(format!(
                "interp_tol must lie in (0, 1e-6], got {}",
                self.interp_tol
            ));
        }
        Ok(())
    }
}

/// Output of the shared prox kernel: the point and θ (original order) plus
/// the sorted-order structure.
struct CappedProx {
    x: Vec<f64>,
    theta: Vec<f64>,
    q: usize,
    ell: usize,
    alpha: f64,
}

/// Prox of `(λ/2) inf_θ Σ x_i²/θ_i` over `{lo ≤ θ_i ≤ hi, Σθ_i ≤ budget}`.
///
/// With the shift `θ' = θ + λ` the inner problem is a norm computation with
/// bounds `(lo + λ, hi + λ)` and budget `budget + d λ`, so the same breakpoint
/// search applies to the points `{(lo + λ)/|w_i|, (hi + λ)/|w_i|}`.
fn prox_capped(w: &[f64], lo: f64, hi: f64, budget: f64, lambda: f64, rtol: f64) -> CappedProx {
    let d = w.len();
    let sorted = SortedMagnitudes::new(w);
    let sol = solve_capped(
        &sorted,
        lo + lambda,
        hi + lambda,
        budget + d as f64 * lambda,
        rtol,
    );
    let mut theta = vec![0.0; d];
    let mut x = vec![0.0; d];
    for (pos, &idx) in sorted.order.iter().enumerate() {
        let t = (sol.theta[pos] - lambda).clamp(lo, hi);
        theta[idx] = t;
        x[idx] = if t == 0.0 {
            0.0
        } else {
            t * w[idx] / (t + lambda)
        };
    }
    debug_assert!(
        {
            // The shift by λ costs about d λ ε of absolute accuracy.
            let total: f64 = theta.iter().sum();
            (total - budget).abs() <= 1e-8 * budget.max(1.0) + 1e-13 * d as f64 * lambda
        },
        "S(alpha*) misses the budget"
    );
    CappedProx {
        x,
        theta,
        q: sol.q,
        ell: sol.ell,
        alpha: sol.alpha,
    }
}

fn check_vector(w: &[f64]) -> Result<()> {
    check_finite(w, "vector")?;
    if w.is_empty() {
        return input("empty vector");
    }
    Ok(())
}

/// `prox_{(λ/2)‖·‖²_box}(w)` together with the optimal θ.
pub fn prox_sq_box(
    w: &[f64],
    params: &BoxParams,
    cfg: &ProxConfig,
) -> Result<(Vec<f64>, NormDecomposition)> {
    check_vector(w)?;
    cfg.check()?;
    let budget = params.budget_for(w.len())?;
    let out = prox_capped(w, params.a, params.b, budget, cfg.lambda, cfg.interp_tol);
    let p_res = budget - out.q as f64 * params.b - out.ell as f64 * params.a;
    Ok((
        out.x,
        NormDecomposition {
            q: out.q,
            ell: out.ell,
            p_res,
            alpha: out.alpha,
            theta: out.theta,
        },
    ))
}

/// `prox_{(λ/2)‖·‖²_(k)}(w)`.
pub fn prox_sq_ksup(w: &[f64], k: usize, cfg: &ProxConfig) -> Result<Vec<f64>> {
    check_vector(w)?;
    cfg.check()?;
    KSupportParams::new(k).check(w.len())?;
    Ok(prox_capped(w, 0.0, 1.0, k as f64, cfg.lambda, cfg.interp_tol).x)
}

/// Same as [`prox_sq_ksup`] but with a real-valued cardinality budget in
/// `[0, d]`, i.e. the Θ-norm over `{0 < θ_i ≤ 1, Σθ_i ≤ k}`.
pub fn prox_sq_ksup_real(w: &[f64], k: f64, cfg: &ProxConfig) -> Result<Vec<f64>> {
    check_vector(w)?;
    cfg.check()?;
    if !(k > 0.0 && k <= w.len() as f64) {
        return param(format!("k must lie in (0, {}], got {k}", w.len()));
    }
    Ok(prox_capped(w, 0.0, 1.0, k, cfg.lambda, cfg.interp_tol).x)
}

/// Moreau parameter `a / (2(b - a))` linking the squared box-norm to the
/// squared k-support norm, and the k-support budget `ρ = (c - d a)/(b - a)`.
fn moreau_parameters(params: &BoxParams, d: usize) -> Result<(f64, f64)> {
    let budget = params.budget_for(d)?;
    let (a, b) = (params.a, params.b);
    let rho = ((budget - d as f64 * a) / (b - a)).clamp(0.0, d as f64);
    Ok((a / (2.0 * (b - a)), rho))
}

/// The k-support component `z = prox_{ρ‖·‖²_(k)}(w)` with `ρ = a/(2(b-a))`.
fn ksup_component(w: &[f64], params: &BoxParams) -> Result<Vec<f64>> {
    let (moreau, budget) = moreau_parameters(params, w.len())?;
    if budget == 0.0 {
        return Ok(vec![0.0; w.len()]);
    }
    Ok(prox_capped(w, 0.0, 1.0, budget, 2.0 * moreau, INTERP_RTOL).x)
}

/// Gradient of `‖·‖²_box`, computed as `(2/a)(w - prox_{ρ‖·‖²_(k)}(w))`.
/// It is Lipschitz with constant `2/a`.
pub fn grad_sq_box(w: &[f64], params: &BoxParams) -> Result<Vec<f64>> {
    check_vector(w)?;
    let a = params.a;
    if params.a == params.b {
        params.budget_for(w.len())?;
        return Ok(w.iter().map(|x| 2.0 * x / a).collect());
    }
    let z = ksup_component(w, params)?;
    Ok(w.iter()
        .zip(&z)
        .map(|(wi, zi)| 2.0 / a * (wi - zi))
        .collect())
}

/// Splits `w = u + z` where `z` is the k-support part of the Moreau
/// decomposition `‖w‖²_box = (1/a)‖u‖² + (1/(b-a))‖z‖²_(k)`.
///
/// With `a == b` the split is degenerate: `u = w`, `z = 0`.
pub fn moreau_split(w: &[f64], params: &BoxParams) -> Result<(Vec<f64>, Vec<f64>)> {
    check_vector(w)?;
    if params.a == params.b {
        params.budget_for(w.len())?;
        return Ok((w.to_vec(), vec![0.0; w.len()]));
    }
    let z = ksup_component(w, params)?;
    let u = w.iter().zip(&z).map(|(wi, zi)| wi - zi).collect();
    Ok((u, z))
}

/// Reference `O(d (k + log d))` prox of `(λ/2)‖·‖²_(k)` that searches the pair
/// `(r, l)` directly: the `r` largest magnitudes are shrunk by `1/(1+λ)`,
/// entries `r+1..l` are shifted down by a common amount and the rest vanish.
///
/// Only used to benchmark and cross-check [`prox_sq_ksup`].
pub fn prox_sq_ksup_reference(w: &[f64], k: usize, lambda: f64) -> Result<Vec<f64>> {
    check_vector(w)?;
    let d = w.len();
    KSupportParams::new(k).check(d)?;
    if !(lambda > 0.0) {
        return param(format!("prox lambda must be positive, got {lambda}"));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| w[j].abs().total_cmp(&w[i].abs()));
    let z: Vec<f64> = order.iter().map(|&i| w[i].abs()).collect();
    let nonzero = z.iter().take_while(|&&v| v > 0.0).count();

    let mut sorted_x = vec![0.0; d];
    if nonzero <= k {
        for i in 0..nonzero {
            sorted_x[i] = z[i] / (1.0 + lambda);
        }
    } else {
        let mut prefix = vec![0.0; d + 1];
        for i in 0..d {
            prefix[i + 1] = prefix[i] + z[i];
        }
        let cap = 1.0 + lambda;
        let slack = 1e-12;
        let mut found = None;
        'outer: for r in (0..k).rev() {
            for l in k..=d {
                let mass = prefix[l] - prefix[r];
                if mass <= 0.0 {
                    continue;
                }
                // Multiplier making Σθ = k with θ = 1 on the head, αz - λ on
                // the middle and 0 on the tail.
                let alpha = ((k - r) as f64 + (l - r) as f64 * lambda) / mass;
                let head_ok = r == 0 || alpha * z[r - 1] >= cap * (1.0 - slack);
                let next_ok = alpha * z[r] < cap * (1.0 + slack);
                let last_ok = alpha * z[l - 1] > lambda * (1.0 - slack);
                let tail_ok = l == d || alpha * z[l] <= lambda * (1.0 + slack);
                if head_ok && next_ok && last_ok && tail_ok {
                    found = Some((r, l, alpha));
                    break 'outer;
                }
            }
        }
        let (r, l, alpha) = found.ok_or_else(|| Error::Numeric {
            iteration: 0,
            message: "reference prox found no admissible (r, l) pair".into(),
        })?;
        for i in 0..r {
            sorted_x[i] = z[i] / cap;
        }
        for i in r..l {
            sorted_x[i] = (z[i] - lambda / alpha).max(0.0);
        }
    }

    let mut x = vec![0.0; d];
    for (pos, &idx) in order.iter().enumerate() {
        x[idx] = sorted_x[pos].copysign(w[idx]);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecnorm::{box_norm, k_support_norm};
    use approx::assert_relative_eq;

    fn cfg(lambda: f64) -> ProxConfig {
        ProxConfig::new(lambda).unwrap()
    }

    #[test]
    fn symmetric_box_prox() {
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        let (x, cert) = prox_sq_box(&[1.0, 1.0], &p, &cfg(1.0)).unwrap();
        assert_relative_eq!(x[0], 3.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 3.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(cert.theta[0], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_penalty_is_identity() {
        let p = BoxParams::new(0.2, 1.0, 2.0).unwrap();
        let w = [1.5, -0.3, 2.0, 0.7];
        let (x, _) = prox_sq_box(&w, &p, &cfg(1e-12)).unwrap();
        let dev: f64 = w
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(dev <= 1e-6 * norm);
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = BoxParams::new(0.2, 1.0, 2.0).unwrap();
        let (x, _) = prox_sq_box(&[0.0; 4], &p, &cfg(0.7)).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(prox_sq_ksup(&[0.0; 3], 2, &cfg(1.0)).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn ksup_prox_examples() {
        let x = prox_sq_ksup(&[1.0, 0.0], 1, &cfg(1.0)).unwrap();
        assert_relative_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_eq!(x[1], 0.0);
        let x = prox_sq_ksup(&[1.0, 1.0, 1.0], 3, &cfg(1.0)).unwrap();
        for v in x {
            assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ProxConfig::new(0.0).is_err());
        assert!(ProxConfig::new(-1.0).is_err());
        let bad = ProxConfig {
            lambda: 1.0,
            interp_tol: 1e-3,
        };
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        assert!(prox_sq_box(&[1.0, 1.0], &p, &bad).is_err());
        assert!(prox_sq_ksup(&[1.0, 1.0], 3, &cfg(1.0)).is_err());
    }

    #[test]
    fn gradient_closed_forms() {
        let p = BoxParams::new(0.5, 1.0, 1.5).unwrap();
        assert_eq!(grad_sq_box(&[0.0, 0.0], &p).unwrap(), vec![0.0, 0.0]);
        let eq = BoxParams::new(0.4, 0.4, 1.2).unwrap();
        let g = grad_sq_box(&[1.0, -2.0, 0.5], &eq).unwrap();
        assert_relative_eq!(g[1], -10.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_equals_danskin_form() {
        // ∇‖w‖²_box = 2 w_i / θ_i at the unique minimizer θ when a > 0.
        let p = BoxParams::from_k(0.3, 1.0, 2.0, 5).unwrap();
        let w = [1.2, -0.4, 3.0, 0.05, -2.2];
        let (_, cert) = box_norm(&w, &p).unwrap();
        let g = grad_sq_box(&w, &p).unwrap();
        for i in 0..5 {
            assert_relative_eq!(g[i], 2.0 * w[i] / cert.theta[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn moreau_identity_small() {
        let p = BoxParams::from_k(0.5, 1.0, 1.0, 2).unwrap();
        let w = [1.0, 1.0];
        let (u, z) = moreau_split(&w, &p).unwrap();
        let (boxv, _) = box_norm(&w, &p).unwrap();
        let (kz, _) = k_support_norm(&z, &KSupportParams::new(1)).unwrap();
        let lhs = u.iter().map(|v| v * v).sum::<f64>() / 0.5 + kz * kz / 0.5;
        assert_relative_eq!(lhs, boxv * boxv, max_relative = 1e-8);
    }

    #[test]
    fn moreau_limits() {
        let w = [1.0, -0.5, 2.0];
        let near_b = BoxParams::from_k(1.0 - 1e-9, 1.0, 1.0, 3).unwrap();
        let (u, z) = moreau_split(&w, &near_b).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-6));
        assert!(u.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-6));
        let near_zero = BoxParams::from_k(1e-10, 1.0, 1.0, 3).unwrap();
        let (u, z) = moreau_split(&w, &near_zero).unwrap();
        assert!(u.iter().all(|v| v.abs() < 1e-6));
        assert!(z.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-6));
        let eq = BoxParams::new(1.0, 1.0, 3.0).unwrap();
        let (u, z) = moreau_split(&w, &eq).unwrap();
        assert_eq!(u, w.to_vec());
        assert_eq!(z, vec![0.0; 3]);
    }

    #[test]
    fn reference_matches_fast_path() {
        let w = [10.0, 1.0];
        let fast = prox_sq_ksup(&w, 1, &cfg(0.5)).unwrap();
        let slow = prox_sq_ksup_reference(&w, 1, 0.5).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
        let w = [0.3, -2.0, 1.1, 0.0, -0.9, 2.0, 0.4];
        for k in 1..=7 {
            for lambda in [0.01, 0.3, 1.0, 7.0] {
                let fast = prox_sq_ksup(&w, k, &cfg(lambda)).unwrap();
                let slow = prox_sq_ksup_reference(&w, k, lambda).unwrap();
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() <= 1e-8, "k={k} lambda={lambda}: {a} vs {b}");
                }
            }
        }
    }
}
