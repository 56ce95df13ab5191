//! Solver behaviour on small problems checked against slow or closed-form
//! references.

mod common;

use ndarray::{Array1, Array2};
use rand::Rng;

use boxnorm::losses::{
    MaskedSquare, MultitaskLogistic, ObservationMask, SmoothLoss, TaskDataset, WithMeanPenalty,
};
use boxnorm::solver::{fista, solve_from_zero, Penalty, SolveConfig, SolveReport, StepRule};
use boxnorm::spectral::{spectral_norm, spectral_prox, SpectralNorm, SpectralPenalty};
use boxnorm::vecnorm::BoxParams;

use common::{center, frob, gauss, gauss_matrix, rng};

/// Low-rank-plus-noise matrix with roughly `frac` of its cells observed.
fn masked_problem(seed: u64, d: usize, t: usize, frac: f64) -> MaskedSquare {
    let mut r = rng(seed);
    let truth = gauss_matrix(&mut r, d, 2).dot(&gauss_matrix(&mut r, 2, t)) + 1.5;
    let mut entries = Vec::new();
    for i in 0..d {
        for j in 0..t {
            if r.gen_bool(frac) {
                entries.push((i, j, truth[[i, j]] + 0.1 * gauss(&mut r)));
            }
        }
    }
    MaskedSquare(ObservationMask::new(d, t, entries).unwrap())
}

fn box_params() -> BoxParams {
    BoxParams::from_k(0.05, 1.0, 1.5, 4).unwrap()
}

fn objective(loss: &dyn SmoothLoss, w: &Array2<f64>, lambda: f64, p: &BoxParams) -> f64 {
    let n = spectral_norm(w.view(), &SpectralNorm::Box(*p)).unwrap();
    loss.value(w.view()).unwrap() + lambda * n * n
}

#[test]
fn fista_matches_a_long_proximal_gradient_run() {
    let loss = masked_problem(3, 6, 4, 0.6);
    let p = box_params();
    let lambda = 0.3;
    let cfg = SolveConfig::synthetic(lambda, Penalty::Box(p));
    let rep = solve_from_zero(&loss, &cfg).unwrap();
    let fast = *rep.objective_trace.last().unwrap();

    // Plain proximal gradient with step 1/L, L = 2.
    let mut w = Array2::<f64>::zeros((6, 4));
    for _ in 0..1_000_000 {
        let (_, g) = loss.value_grad(w.view()).unwrap();
        let moved = &w - &(&g * 0.5);
        w = spectral_prox(moved.view(), &SpectralPenalty::SqBox(p), 2.0 * 0.5 * lambda).unwrap();
    }
    let slow = objective(&loss, &w, lambda, &p);
    assert!(
        (fast - slow).abs() <= 10.0 * cfg.tol * slow,
        "fista {fast} vs long run {slow}"
    );
    assert!((objective(&loss, &rep.w_hat, lambda, &p) - fast).abs() <= 1e-9 * fast);
}

#[test]
fn running_minimum_never_increases() {
    let loss = masked_problem(5, 8, 5, 0.5);
    for penalty in [
        Penalty::Trace,
        Penalty::KSupport(2),
        Penalty::Box(box_params_for(5)),
    ] {
        let rep = solve_from_zero(&loss, &SolveConfig::synthetic(0.5, penalty)).unwrap();
        let mut best = f64::INFINITY;
        for &v in &rep.objective_trace {
            assert!(v.is_finite());
            best = best.min(v);
        }
        assert!(best <= rep.objective_trace[0]);
        assert!(*rep.objective_trace.last().unwrap() < rep.objective_trace[0]);
    }
}

fn box_params_for(t: usize) -> BoxParams {
    BoxParams::from_k(0.05, 1.0, 1.5, t).unwrap()
}

#[test]
fn identical_inputs_give_identical_reports() {
    let run = || -> SolveReport {
        let loss = masked_problem(9, 7, 5, 0.5);
        let cfg = SolveConfig {
            centered: true,
            ..SolveConfig::synthetic(0.2, Penalty::Box(box_params_for(5)))
        };
        solve_from_zero(&loss, &cfg).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn column_mean_is_the_best_offset_for_a_centered_solution() {
    let loss = masked_problem(11, 7, 5, 0.7);
    let p = box_params_for(5);
    let lambda = 0.2;
    let cfg = SolveConfig {
        centered: true,
        tol: 1e-10,
        max_iter: 100_000,
        ..SolveConfig::synthetic(lambda, Penalty::Box(p))
    };
    let rep = solve_from_zero(&loss, &cfg).unwrap();
    let w = &rep.w_hat;
    let norm = SpectralNorm::Box(p);
    let centered = spectral_norm(center(w.view()).view(), &norm).unwrap();

    let mut r = rng(12);
    for _ in 0..100 {
        let z = Array1::from_shape_fn(7, |_| gauss(&mut r));
        let mut shifted = w.clone();
        for mut col in shifted.columns_mut() {
            col -= &z;
        }
        assert!(centered <= spectral_norm(shifted.view(), &norm).unwrap() + 1e-6);
    }

    // At the optimum V is the centered part of W, so the reported objective
    // equals the uncentered objective with the penalty on W Π.
    let z = rep.z_hat.as_ref().unwrap();
    let mut v = w.clone();
    for mut col in v.columns_mut() {
        col -= z;
    }
    let gap = frob((&v - &center(w.view())).view()) / frob(w.view());
    assert!(gap < 1e-3, "V differs from W Π by {gap}");
    let expected = loss.value(w.view()).unwrap() + lambda * centered * centered;
    let reported = *rep.objective_trace.last().unwrap();
    assert!((reported - expected).abs() <= 1e-6 * expected);
}

#[test]
fn heavy_mean_penalty_removes_the_offset() {
    let p = box_params_for(4);
    let base = SolveConfig {
        tol: 1e-15,
        max_iter: 400_000,
        ..SolveConfig::synthetic(0.2, Penalty::Box(p))
    };
    let centered_cfg = SolveConfig {
        centered: true,
        ..base.clone()
    };
    // The offset decays like 1/eps and the gap to the uncentered solve closes.
    let mut last: Option<(f64, f64)> = None;
    for eps_m in [1e1, 1e2, 1e3] {
        let loss = WithMeanPenalty {
            loss: masked_problem(13, 6, 4, 0.8),
            eps_m,
        };
        let centered = solve_from_zero(&loss, &centered_cfg).unwrap();
        let plain = solve_from_zero(&loss, &base).unwrap();
        let z = centered.z_hat.as_ref().unwrap();
        let offset = z.dot(z).sqrt();
        let gap = frob((&centered.w_hat - &plain.w_hat).view());
        if let Some((o, g)) = last {
            assert!(offset < 0.2 * o, "offset {offset} after {o}");
            assert!(gap < g, "gap {gap} after {g}");
        }
        last = Some((offset, gap));
    }
    let (offset, gap) = last.unwrap();
    assert!(offset < 1e-2 && gap < 2e-3);
}

#[test]
fn backtracking_handles_logistic_loss() {
    let mut r = rng(21);
    let (d, tasks) = (4, 3);
    let beta = gauss_matrix(&mut r, d, tasks);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in 0..tasks {
        let x = gauss_matrix(&mut r, 30, d);
        let y: Array1<f64> = x.dot(&beta.column(t)).mapv(|s| {
            if s + 0.3 * gauss(&mut r) > 0.0 {
                1.0
            } else {
                -1.0
            }
        });
        xs.push(x);
        ys.push(y);
    }
    let loss = MultitaskLogistic(TaskDataset::new(xs, ys).unwrap());
    let cfg = SolveConfig {
        step: StepRule::backtracking(),
        tol: 1e-8,
        ..SolveConfig::synthetic(1.0, Penalty::Trace)
    };
    let rep = fista(&loss, &cfg, Array2::zeros((d, tasks)).view()).unwrap();
    let start = rep.objective_trace[0];
    let end = *rep.objective_trace.last().unwrap();
    assert!(end < 0.8 * start, "{start} -> {end}");
    // The solution is a fixed point of one more prox-gradient step.
    let (_, g) = loss.value_grad(rep.w_hat.view()).unwrap();
    let step = 1e-2;
    let moved = &rep.w_hat - &(&g * step);
    let again = spectral_prox(moved.view(), &SpectralPenalty::Trace, step).unwrap();
    assert!(frob((&again - &rep.w_hat).view()) < 1e-4 * frob(rep.w_hat.view()).max(1.0));
}

fn fully_observed(y: &Array2<f64>) -> MaskedSquare {
    let cells: Vec<(usize, usize)> = (0..y.nrows())
        .flat_map(|i| (0..y.ncols()).map(move |j| (i, j)))
        .collect();
    MaskedSquare(ObservationMask::from_cells(y.view(), &cells).unwrap())
}

/// Singular value soft-thresholding through the eigenvectors of `YᵀY`.
fn soft_threshold(y: &Array2<f64>, tau: f64) -> Array2<f64> {
    let (vals, vecs) = common::sym_eig(y.t().dot(y).view());
    let scale = Array1::from_iter(vals.iter().map(|&e| {
        let s = e.max(0.0).sqrt();
        if s > tau {
            (s - tau) / s
        } else {
            0.0
        }
    }));
    y.dot(&vecs).dot(&Array2::from_diag(&scale)).dot(&vecs.t())
}

#[test]
fn full_observation_trace_is_soft_thresholding() {
    let mut r = rng(31);
    let y = gauss_matrix(&mut r, 6, 4) * 2.0;
    let lambda = 1.5;
    let cfg = SolveConfig {
        tol: 1e-14,
        max_iter: 50_000,
        ..SolveConfig::synthetic(lambda, Penalty::Trace)
    };
    let rep = solve_from_zero(&fully_observed(&y), &cfg).unwrap();
    let expected = soft_threshold(&y, lambda / 2.0);
    assert!(frob((&rep.w_hat - &expected).view()) < 1e-6 * frob(expected.view()));
}

#[test]
fn full_observation_frobenius_is_uniform_shrinkage() {
    let mut r = rng(32);
    let y = gauss_matrix(&mut r, 5, 3);
    let lambda = 0.7;
    let cfg = SolveConfig {
        tol: 1e-14,
        max_iter: 50_000,
        ..SolveConfig::synthetic(lambda, Penalty::Frobenius)
    };
    let rep = solve_from_zero(&fully_observed(&y), &cfg).unwrap();
    let expected = &y / (1.0 + lambda);
    assert!(frob((&rep.w_hat - &expected).view()) < 1e-8 * frob(y.view()));
}
