//! Randomised invariants of the norms, duals and proximity operators.

mod common;

use ndarray::Array2;
use proptest::prelude::*;

use boxnorm::prox::{grad_sq_box, prox_sq_box, prox_sq_ksup, ProxConfig};
use boxnorm::spectral::{spectral_norm, spectral_prox, SpectralNorm, SpectralPenalty};
use boxnorm::vecnorm::{
    box_norm, dual_box_norm, dual_k_support_norm, k_support_norm, BoxParams, KSupportParams,
};

use common::{frob, norm2};

fn vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![4 => -10.0..10.0f64, 1 => Just(0.0)],
        1..=max_len,
    )
}

/// `(w, params)` with `d a ≤ c ≤ d b`.
fn vector_and_box(max_len: usize) -> impl Strategy<Value = (Vec<f64>, BoxParams)> {
    vector(max_len).prop_flat_map(|w| {
        let d = w.len() as f64;
        (0.01..2.0f64, 0.0..3.0f64, 0.0..=1.0f64).prop_map(move |(a, gap, t)| {
            let b = a + gap;
            let c = d * (a + t * gap);
            (w.clone(), BoxParams::new(a, b, c).unwrap())
        })
    })
}

fn pair_and_box(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, BoxParams)> {
    vector_and_box(max_len).prop_flat_map(|(w, p)| {
        let d = w.len();
        prop::collection::vec(-10.0..10.0f64, d).prop_map(move |u| (w.clone(), u, p))
    })
}

fn matrix() -> impl Strategy<Value = Array2<f64>> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5.0..5.0f64, r * c)
            .prop_map(move |v| Array2::from_shape_vec((r, c), v).unwrap())
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn box_norm_lies_between_scaled_l2((w, p) in vector_and_box(12)) {
        let v = box_norm(&w, &p).unwrap().0;
        let l2 = norm2(&w);
        prop_assert!(v >= l2 / p.b.sqrt() * (1.0 - 1e-12));
        prop_assert!(v <= l2 / p.a.sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn certificate_is_feasible_and_tight((w, p) in vector_and_box(12)) {
        let (v, cert) = box_norm(&w, &p).unwrap();
        let total: f64 = cert.theta.iter().sum();
        prop_assert!(total <= p.c * (1.0 + 1e-10));
        for &t in &cert.theta {
            prop_assert!(t >= p.a * (1.0 - 1e-12) && t <= p.b * (1.0 + 1e-12));
        }
        let value: f64 = w.iter().zip(&cert.theta).map(|(x, t)| x * x / t).sum();
        prop_assert!((value.sqrt() - v).abs() <= 1e-9 * v.max(1.0));
    }

    #[test]
    fn box_norm_ignores_signs_and_order((w, p) in vector_and_box(10), shift in 0usize..10) {
        let mut moved: Vec<f64> = w.iter().map(|x| -x).collect();
        let len = moved.len();
        moved.rotate_left(shift % len);
        let x = box_norm(&w, &p).unwrap().0;
        let y = box_norm(&moved, &p).unwrap().0;
        prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }

    #[test]
    fn box_norm_is_absolutely_homogeneous((w, p) in vector_and_box(10), s in -5.0..5.0f64) {
        let scaled: Vec<f64> = w.iter().map(|x| s * x).collect();
        let x = box_norm(&w, &p).unwrap().0;
        let y = box_norm(&scaled, &p).unwrap().0;
        prop_assert!((y - s.abs() * x).abs() <= 1e-10 * y.max(1.0));
    }

    #[test]
    fn box_norm_triangle_inequality((w, u, p) in pair_and_box(10)) {
        let sum: Vec<f64> = w.iter().zip(&u).map(|(a, b)| a + b).collect();
        let lhs = box_norm(&sum, &p).unwrap().0;
        let rhs = box_norm(&w, &p).unwrap().0 + box_norm(&u, &p).unwrap().0;
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn dual_pairing_bound((w, u, p) in pair_and_box(10)) {
        let bound = box_norm(&w, &p).unwrap().0 * dual_box_norm(&u, &p).unwrap();
        prop_assert!(dot(&w, &u) <= bound * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn ksupport_is_sandwiched_and_monotone(w in vector(10)) {
        let d = w.len();
        let l1: f64 = w.iter().map(|x| x.abs()).sum();
        let l2 = norm2(&w);
        let mut prev = f64::INFINITY;
        for k in 1..=d {
            let v = k_support_norm(&w, &KSupportParams::new(k)).unwrap().0;
            prop_assert!(v >= l2 * (1.0 - 1e-12) && v <= l1 * (1.0 + 1e-12) + 1e-300);
            prop_assert!(v <= prev * (1.0 + 1e-12));
            prev = v;
            let dual = dual_k_support_norm(&w, &KSupportParams::new(k)).unwrap();
            // ⟨w, w⟩ ≤ ‖w‖_(k) ‖w‖_(k)*
            prop_assert!(l2 * l2 <= v * dual * (1.0 + 1e-10) + 1e-12);
        }
    }

    #[test]
    fn prox_is_nonexpansive((w, u, p) in pair_and_box(10), lambda in 0.01..10.0f64) {
        let cfg = ProxConfig::new(lambda).unwrap();
        let x = prox_sq_box(&w, &p, &cfg).unwrap().0;
        let y = prox_sq_box(&u, &p, &cfg).unwrap().0;
        prop_assert!(norm2(&sub(&x, &y)) <= norm2(&sub(&w, &u)) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn prox_shrinks_each_coordinate((w, p) in vector_and_box(10), lambda in 0.01..10.0f64) {
        let x = prox_sq_box(&w, &p, &ProxConfig::new(lambda).unwrap()).unwrap().0;
        for (xi, wi) in x.iter().zip(&w) {
            prop_assert!(xi.abs() <= wi.abs() * (1.0 + 1e-12));
            prop_assert!(xi * wi >= 0.0);
        }
    }

    #[test]
    fn prox_beats_perturbations(
        (w, p) in vector_and_box(8),
        lambda in 0.01..10.0f64,
        noise in prop::collection::vec(-1e-3..1e-3f64, 8),
    ) {
        let objective = |x: &[f64]| {
            0.5 * norm2(&sub(x, &w)).powi(2) + 0.5 * lambda * box_norm(x, &p).unwrap().0.powi(2)
        };
        let x = prox_sq_box(&w, &p, &ProxConfig::new(lambda).unwrap()).unwrap().0;
        let moved: Vec<f64> = x.iter().zip(&noise).map(|(a, b)| a + b).collect();
        prop_assert!(objective(&x) <= objective(&moved) + 1e-12 * objective(&x).max(1.0));
    }

    #[test]
    fn ksup_prox_agrees_with_box_limit(w in vector(8), lambda in 0.05..5.0f64, kf in 0.0..1.0f64) {
        let d = w.len();
        let k = 1 + ((d - 1) as f64 * kf) as usize;
        let x = prox_sq_ksup(&w, k, &ProxConfig::new(lambda).unwrap()).unwrap();
        // A tiny lower bound perturbs the box prox continuously.
        let p = BoxParams::from_k(1e-9, 1.0, k as f64, d).unwrap();
        let y = prox_sq_box(&w, &p, &ProxConfig::new(lambda).unwrap()).unwrap().0;
        prop_assert!(norm2(&sub(&x, &y)) <= 1e-6 * norm2(&w).max(1.0));
    }

    #[test]
    fn gradient_is_lipschitz((w, u, p) in pair_and_box(10)) {
        let g = grad_sq_box(&w, &p).unwrap();
        let h = grad_sq_box(&u, &p).unwrap();
        let lip = 2.0 / p.a;
        prop_assert!(norm2(&sub(&g, &h)) <= lip * norm2(&sub(&w, &u)) * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn spectral_trace_prox_is_nonexpansive(m in matrix(), lambda in 0.01..5.0f64, seed in 0u64..1000) {
        let mut rng = common::rng(seed);
        let other = &m + &common::gauss_matrix(&mut rng, m.nrows(), m.ncols());
        let x = spectral_prox(m.view(), &SpectralPenalty::Trace, lambda).unwrap();
        let y = spectral_prox(other.view(), &SpectralPenalty::Trace, lambda).unwrap();
        prop_assert!(frob((&x - &y).view()) <= frob((&m - &other).view()) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn spectral_norms_agree_with_gram_spectrum(m in matrix(), kf in 0.0..1.0f64) {
        let sigma = common::singular_values(m.view());
        let r = sigma.len();
        let k = 1 + ((r - 1) as f64 * kf) as usize;
        let ours = spectral_norm(m.view(), &SpectralNorm::KSupport(k)).unwrap();
        let oracle = k_support_norm(&sigma, &KSupportParams::new(k)).unwrap().0;
        prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }
}
