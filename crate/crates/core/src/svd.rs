//! Thin singular value decomposition by one-sided Jacobi rotations.
//!
//! The kernel orthogonalises the columns of a tall working copy `G = A V` by
//! cyclic sweeps of plane rotations until every pair is orthogonal to a
//! relative tolerance. Singular values are the final column norms, the left
//! factor is `G` with normalised columns and the right factor is the
//! accumulated rotation `V`. Wide inputs are handled through the transpose.

use ndarray::{Array2, ArrayView2};

use crate::error::{input, Result};

/// Off-diagonal rotations below this relative size are skipped.
const ROTATION_TOL: f64 = 1e-12;
const QUADRATIC_EXIT: f64 = 1e-8;
const MAX_SWEEPS: usize = 60;

/// Thin SVD `W = U diag(σ) Vᵀ` with `r = min(d, T)` columns in each factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: Array2<f64>,
    pub sigma: Vec<f64>,
    pub v: Array2<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.r()
    }

    fn r(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(s) Vᵀ` for a replacement spectrum `s` of length `r`.
    pub fn reconstruct_with(&self, s: &[f64]) -> Array2<f64> {
        assert_eq!(s.len(), self.r(), "spectrum length must match the factors");
        let keep: Vec<usize> = (0..s.len()).filter(|&j| s[j] != 0.0).collect();
        let (d, t) = (self.u.nrows(), self.v.nrows());
        if keep.is_empty() {
            return Array2::zeros((d, t));
        }
        let mut us = Array2::zeros((d, keep.len()));
        let mut vk = Array2::zeros((t, keep.len()));
        for (col, &j) in keep.iter().enumerate() {
            us.column_mut(col).assign(&(&self.u.column(j) * s[j]));
            vk.column_mut(col).assign(&self.v.column(j));
        }
        us.dot(&vk.t())
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.reconstruct_with(&self.sigma)
    }

    /// Number of singular values strictly above `tol`.
    pub fn numeric_rank(&self, tol: f64) -> usize {
        self.sigma.iter().filter(|&&s| s > tol).count()
    }
}

/// Column-major scratch holding `n` columns of `G` (length `m`), each
/// followed by the matching column of the right basis (length `n`), so one
/// rotation pass updates both.
struct Work {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl Work {
    fn stride(&self) -> usize {
        self.m + self.n
    }

    fn g(&self, j: usize) -> &[f64] {
        let s = self.stride();
        &self.data[j * s..j * s + self.m]
    }

    fn basis(&self, j: usize) -> &[f64] {
        let s = self.stride();
        &self.data[j * s + self.m..(j + 1) * s]
    }

    fn basis_mut(&mut self, j: usize) -> &mut [f64] {
        let s = self.stride();
        let m = self.m;
        &mut self.data[j * s + m..(j + 1) * s]
    }

    fn g_mut(&mut self, j: usize) -> &mut [f64] {
        let s = self.stride();
        let m = self.m;
        &mut self.data[j * s..j * s + m]
    }

    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let s = self.stride();
        let (head, tail) = self.data.split_at_mut(q * s);
        (&mut head[p * s..(p + 1) * s], &mut tail[..s])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Reusable state for a sequence of decompositions of slowly varying
/// matrices of one shape. The right rotation from the previous call seeds the
/// next one, so nearly converged inputs need only a sweep or two.
#[derive(Debug, Clone, Default)]
pub struct SvdWorkspace {
    shape: Option<(usize, usize)>,
    basis: Vec<f64>,
}

impl SvdWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forget the stored rotation.
    pub fn reset(&mut self) {
        self.shape = None;
        self.basis.clear();
    }
}

/// Thin SVD of `w`. Deterministic: fixed sweep order, stable descending sort
/// of σ, and the first nonzero entry of each left singular vector is made
/// nonnegative.
pub fn thin_svd(w: ArrayView2<'_, f64>) -> Result<SvdFactors> {
    decompose(w, None)
}

/// As [`thin_svd`], starting the rotations from the right basis left in
/// `ws` by the previous call with the same shape.
pub fn thin_svd_warm(w: ArrayView2<'_, f64>, ws: &mut SvdWorkspace) -> Result<SvdFactors> {
    decompose(w, Some(ws))
}

fn decompose(w: ArrayView2<'_, f64>, ws: Option<&mut SvdWorkspace>) -> Result<SvdFactors> {
    if w.iter().any(|v| !v.is_finite()) {
        return input("matrix contains non-finite entries");
    }
    let (d, t) = w.dim();
    let wide = d < t;
    // Work on a tall matrix A (m x n, m >= n).
    let a = if wide { w.t() } else { w.view() };
    let (m, n) = a.dim();
    if n == 0 {
        return Ok(SvdFactors {
            u: Array2::zeros((d, 0)),
            sigma: Vec::new(),
            v: Array2::zeros((t, 0)),
        });
    }

    let mut work = Work {
        m,
        n,
        data: vec![0.0; (m + n) * n],
    };
    let previous = ws
        .as_ref()
        .filter(|s| s.shape == Some((d, t)) && s.basis.len() == n * n)
        .map(|s| s.basis.clone());
    match previous {
        Some(prev) => {
            // G = A * basis.
            for j in 0..n {
                let bj = &prev[j * n..(j + 1) * n];
                work.basis_mut(j).copy_from_slice(bj);
                let gj = work.g_mut(j);
                for (k, &coef) in bj.iter().enumerate() {
                    if coef != 0.0 {
                        for (gi, &ai) in gj.iter_mut().zip(a.column(k).iter()) {
                            *gi += coef * ai;
                        }
                    }
                }
            }
        }
        None => {
            for j in 0..n {
                work.basis_mut(j)[j] = 1.0;
                for (gi, &ai) in work.g_mut(j).iter_mut().zip(a.column(j).iter()) {
                    *gi = ai;
                }
            }
        }
    }

    jacobi_sweeps(&mut work);

    if let Some(s) = ws {
        s.shape = Some((d, t));
        s.basis.clear();
        for j in 0..n {
            s.basis.extend_from_slice(work.basis(j));
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| dot(work.g(j), work.g(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma_max = norms[order[0]];
    let zero_tol = sigma_max * (m as f64) * f64::EPSILON;

    let mut left = Array2::<f64>::zeros((m, n));
    let mut right = Array2::<f64>::zeros((n, n));
    let mut sigma = vec![0.0; n];
    let mut filled = 0;
    for (pos, &j) in order.iter().enumerate() {
        right
            .column_mut(pos)
            .assign(&ndarray::ArrayView1::from(work.basis(j)));
        let s = norms[j];
        if s > zero_tol && s > 0.0 {
            sigma[pos] = s;
            for (dst, &src) in left.column_mut(pos).iter_mut().zip(work.g(j)) {
                *dst = src / s;
            }
            filled = pos + 1;
        }
    }
    complete_orthonormal(&mut left, filled);

    let (u, v) = if wide { (right, left) } else { (left, right) };
    let mut out = SvdFactors { u, sigma, v };
    for pos in 0..n {
        let flip = out
            .u
            .column(pos)
            .iter()
            .find(|x| x.abs() > 1e-12)
            .is_some_and(|&x| x < 0.0);
        if flip {
            out.u.column_mut(pos).mapv_inplace(|x| -x);
            out.v.column_mut(pos).mapv_inplace(|x| -x);
        }
    }
    Ok(out)
}

fn jacobi_sweeps(w: &mut Work) {
    let n = w.n;
    let mut norms: Vec<f64> = (0..n).map(|j| dot(w.g(j), w.g(j))).collect();
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    let negligible = scale * f64::EPSILON * f64::EPSILON;
    for sweep in 0..MAX_SWEEPS {
        if sweep > 0 {
            // The in-sweep norm updates drift slightly; refresh them.
            for (j, nj) in norms.iter_mut().enumerate() {
                *nj = dot(w.g(j), w.g(j));
            }
        }
        let mut largest: f64 = 0.0;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(w.g(p), w.g(q));
                let off = gamma.abs() / (alpha * beta).sqrt();
                if off <= ROTATION_TOL {
                    continue;
                }
                largest = largest.max(off);
                let zeta = (beta - alpha) / (2.0 * gamma);
                let tan = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cos = 1.0 / (1.0 + tan * tan).sqrt();
                let sin = cos * tan;
                let (cp, cq) = w.pair_mut(p, q);
                rotate(cp, cq, cos, sin);
                norms[p] = alpha - tan * gamma;
                norms[q] = beta + tan * gamma;
            }
        }
        // Convergence is quadratic, so once every rotation in a sweep is
        // below QUADRATIC_EXIT the next sweep would find all pairs below
        // ROTATION_TOL and can be skipped.
        if largest <= QUADRATIC_EXIT {
            break;
        }
    }
}

/// Fill columns `filled..` of `u` with an orthonormal completion of the
/// first `filled` columns (modified Gram-Schmidt, applied twice).
fn complete_orthonormal(u: &mut Array2<f64>, filled: usize) {
    let (m, n) = u.dim();
    let mut next = filled;
    let mut candidate = 0;
    while next < n && candidate < m {
        let mut v = vec![0.0; m];
        v[candidate] = 1.0;
        candidate += 1;
        for _ in 0..2 {
            for j in 0..next {
                let col = u.column(j);
                let proj: f64 = col.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, &ci) in v.iter_mut().zip(col.iter()) {
                    *vi -= proj * ci;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for (dst, src) in u.column_mut(next).iter_mut().zip(&v) {
                *dst = src / norm;
            }
            next += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(d: usize, t: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((d, t), |_| rng.gen_range(-1.0..1.0))
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn check_factors(w: &Array2<f64>, f: &SvdFactors) {
        let r = w.nrows().min(w.ncols());
        assert_eq!(f.sigma.len(), r);
        let eye = Array2::<f64>::eye(r);
        assert!(max_abs(&(f.u.t().dot(&f.u) - &eye)) <= 1e-10);
        assert!(max_abs(&(f.v.t().dot(&f.v) - &eye)) <= 1e-10);
        assert!(f.sigma.windows(2).all(|p| p[0] >= p[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        let fro = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let err = (f.reconstruct() - w)
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-8 * fro.max(1.0), "reconstruction error {err}");
    }

    #[test]
    fn diagonal_input() {
        let w = array![[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        let f = thin_svd(w.view()).unwrap();
        assert_eq!(f.sigma, vec![3.0, 2.0, 1.0]);
        assert!(max_abs(&(f.u.mapv(f64::abs) - Array2::<f64>::eye(3))) < 1e-14);
        assert!(max_abs(&(f.v.mapv(f64::abs) - Array2::<f64>::eye(3))) < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let w = Array2::<f64>::zeros((4, 3));
        let f = thin_svd(w.view()).unwrap();
        assert_eq!(f.sigma, vec![0.0; 3]);
        check_factors(&w, &f);
    }

    #[test]
    fn random_shapes() {
        for (seed, (d, t)) in [(5, 4), (4, 5), (7, 7), (1, 6), (6, 1), (30, 12)]
            .into_iter()
            .enumerate()
        {
            let w = random(d, t, seed as u64);
            let f = thin_svd(w.view()).unwrap();
            check_factors(&w, &f);
        }
    }

    #[test]
    fn rank_deficient() {
        let a = random(8, 2, 3);
        let b = random(6, 2, 4);
        let w = a.dot(&b.t());
        let f = thin_svd(w.view()).unwrap();
        check_factors(&w, &f);
        assert_eq!(f.numeric_rank(1e-10), 2);
    }

    #[test]
    fn sign_convention() {
        let w = random(5, 4, 9);
        let f = thin_svd(w.view()).unwrap();
        for col in f.u.columns() {
            let first = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn warm_start_matches_cold() {
        let mut ws = SvdWorkspace::new();
        let mut w = random(20, 15, 11);
        for step in 0..4 {
            let warm = thin_svd_warm(w.view(), &mut ws).unwrap();
            let cold = thin_svd(w.view()).unwrap();
            check_factors(&w, &warm);
            for (x, y) in warm.sigma.iter().zip(&cold.sigma) {
                assert!((x - y).abs() <= 1e-12 * cold.sigma[0]);
            }
            w = &w + &(random(20, 15, 100 + step) * 0.01);
        }
    }

    #[test]
    fn rejects_nan() {
        let mut w = random(3, 3, 1);
        w[[1, 1]] = f64::NAN;
        assert!(thin_svd(w.view()).is_err());
    }
}
