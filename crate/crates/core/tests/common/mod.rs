//! Independent numerical helpers shared by the integration tests. Nothing
//! here calls into the crate, so the routines can serve as oracles.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gauss_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gauss(rng)).collect()
}

pub fn gauss_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| gauss(rng))
}

/// Haar-ish random orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    loop {
        let mut q = gauss_matrix(rng, n, n);
        let mut ok = true;
        for j in 0..n {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).to_owned();
                q.column_mut(j).scaled_add(-proj, &qi);
            }
            let norm = q.column(j).dot(&q.column(j)).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            q.column_mut(j).mapv_inplace(|x| x / norm);
        }
        if ok {
            return q;
        }
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues come back nonincreasing with eigenvectors as columns.
pub fn sym_eig(a: ArrayView2<'_, f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let vals = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vecs = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        vecs.column_mut(col).assign(&v.column(i));
    }
    (vals, vecs)
}

/// Singular values of `w` (length `min(d, T)`, nonincreasing) from the
/// eigenvalues of the smaller Gram matrix.
pub fn singular_values(w: ArrayView2<'_, f64>) -> Vec<f64> {
    let gram = if w.nrows() <= w.ncols() {
        w.dot(&w.t())
    } else {
        w.t().dot(&w)
    };
    sym_eig(gram.view())
        .0
        .into_iter()
        .map(|e| e.max(0.0).sqrt())
        .collect()
}

pub fn frob(w: ArrayView2<'_, f64>) -> f64 {
    w.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Each column minus the column mean.
pub fn center(w: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean: Array1<f64> = w.mean_axis(ndarray::Axis(1)).unwrap();
    let mut out = w.to_owned();
    for mut col in out.columns_mut() {
        col -= &mean;
    }
    out
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_grad(x: &[f64], h: f64, f: &dyn Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = h * x[i].abs().max(1.0);
            y[i] = x[i] + step;
            let up = f(&y);
            y[i] = x[i] - step;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}
