//! Smooth loss terms for completion and multitask learning, and the cluster
//! seminorms `Ω_m`, `Ω_b`, `Ω_w`.
//!
//! Matrices are `d × T` with one column per task (or per matrix column in
//! completion problems).

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{input, param, Result};
use crate::svd::thin_svd;

/// Observed cells `(row, col, value)` of a `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl ObservationMask {
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(i, j, v) in &entries {
            if i >= rows || j >= cols {
                return input(format!("cell ({i}, {j}) outside a {rows}x{cols} grid"));
            }
            if !v.is_finite() {
                return input(format!("cell ({i}, {j}) has non-finite value"));
            }
            if !seen.insert((i, j)) {
                return input(format!("cell ({i}, {j}) observed twice"));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Observe every listed cell of `source`.
    pub fn from_cells(source: ArrayView2<'_, f64>, cells: &[(usize, usize)]) -> Result<Self> {
        let (rows, cols) = source.dim();
        let mut entries = Vec::with_capacity(cells.len());
        for &(i, j) in cells {
            if i >= rows || j >= cols {
                return input(format!("cell ({i}, {j}) outside a {rows}x{cols} grid"));
            }
            entries.push((i, j, source[[i, j]]));
        }
        Self::new(rows, cols, entries)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Dense matrix with observed values and zeros elsewhere.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for &(i, j, v) in &self.entries {
            out[[i, j]] = v;
        }
        out
    }

    fn check_shape(&self, w: ArrayView2<'_, f64>) -> Result<()> {
        if w.dim() != (self.rows, self.cols) {
            return input(format!(
                "matrix is {:?}, mask expects {}x{}",
                w.dim(),
                self.rows,
                self.cols
            ));
        }
        Ok(())
    }
}

/// Per-task design matrices `X_t` (`n_t × d`) and targets `y_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    xs: Vec<Array2<f64>>,
    ys: Vec<Array1<f64>>,
    /// Class index of each pooled example, set by [`TaskDataset::one_vs_rest`].
    pub labels: Option<Vec<usize>>,
}

impl TaskDataset {
    pub fn new(xs: Vec<Array2<f64>>, ys: Vec<Array1<f64>>) -> Result<Self> {
        if xs.is_empty() {
            return input("dataset has no tasks");
        }
        if xs.len() != ys.len() {
            return input(format!(
                "{} design matrices but {} targets",
                xs.len(),
                ys.len()
            ));
        }
        let d = xs[0].ncols();
        for (t, (x, y)) in xs.iter().zip(&ys).enumerate() {
            if x.ncols() != d {
                return input(format!("task {t} has {} features, expected {d}", x.ncols()));
            }
            if x.nrows() != y.len() {
                return input(format!(
                    "task {t} has {} rows but {} targets",
                    x.nrows(),
                    y.len()
                ));
            }
            if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
                return input(format!("task {t} contains non-finite values"));
            }
        }
        Ok(Self {
            xs,
            ys,
            labels: None,
        })
    }

    /// One binary task per class over a shared pool of inputs: task `t` has
    /// target `+1` on examples of class `t` and `-1` elsewhere.
    pub fn one_vs_rest(x: Array2<f64>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.len() != x.nrows() {
            return input(format!(
                "{} labels for {} examples",
                labels.len(),
                x.nrows()
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return input(format!("label {bad} outside 0..{classes}"));
        }
        let ys = (0..classes)
            .map(|t| {
                labels
                    .iter()
                    .map(|&l| if l == t { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        let mut out = Self::new(vec![x; classes], ys)?;
        out.labels = Some(labels);
        Ok(out)
    }

    pub fn tasks(&self) -> usize {
        self.xs.len()
    }

    pub fn features(&self) -> usize {
        self.xs[0].ncols()
    }

    /// Total number of examples over all tasks.
    pub fn examples(&self) -> usize {
        self.ys.iter().map(|y| y.len()).sum()
    }

    pub fn x(&self, t: usize) -> &Array2<f64> {
        &self.xs[t]
    }

    pub fn y(&self, t: usize) -> &Array1<f64> {
        &self.ys[t]
    }

    /// Predictions `X_t w_t` for every task.
    pub fn predict(&self, w: ArrayView2<'_, f64>) -> Result<Vec<Array1<f64>>> {
        self.check_shape(w)?;
        Ok(self
            .xs
            .iter()
            .enumerate()
            .map(|(t, x)| x.dot(&w.column(t)))
            .collect())
    }

    fn check_shape(&self, w: ArrayView2<'_, f64>) -> Result<()> {
        if w.dim() != (self.features(), self.tasks()) {
            return input(format!(
                "weight matrix is {:?}, dataset needs {}x{}",
                w.dim(),
                self.features(),
                self.tasks()
            ));
        }
        Ok(())
    }
}

/// Partition of the tasks into clusters: `assignment[t]` is the cluster of
/// task `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityInfo {
    assignment: Vec<usize>,
    clusters: usize,
}

impl ConnectivityInfo {
    pub fn new(assignment: Vec<usize>, clusters: usize) -> Result<Self> {
        let mut sizes = vec![0usize; clusters];
        for &q in &assignment {
            if q >= clusters {
                return param(format!("cluster {q} outside 0..{clusters}"));
            }
            sizes[q] += 1;
        }
        if let Some(q) = sizes.iter().position(|&s| s == 0) {
            return param(format!("cluster {q} is empty"));
        }
        Ok(Self {
            assignment,
            clusters,
        })
    }

    pub fn tasks(&self) -> usize {
        self.assignment.len()
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Normalised connectivity `M` with `M_st = 1/T_q` when `s, t` share
    /// cluster `q`.
    pub fn connectivity(&self) -> Array2<f64> {
        let t = self.tasks();
        let mut sizes = vec![0usize; self.clusters];
        for &q in &self.assignment {
            sizes[q] += 1;
        }
        Array2::from_shape_fn((t, t), |(s, r)| {
            let q = self.assignment[s];
            if q == self.assignment[r] {
                1.0 / sizes[q] as f64
            } else {
                0.0
            }
        })
    }
}

/// `Σ (W_ij - y_ij)²` over the observed cells and its gradient.
pub fn masked_sq_loss(
    w: ArrayView2<'_, f64>,
    mask: &ObservationMask,
) -> Result<(f64, Array2<f64>)> {
    mask.check_shape(w)?;
    let mut grad = Array2::zeros(w.dim());
    let mut value = 0.0;
    for &(i, j, y) in mask.entries() {
        let r = w[[i, j]] - y;
        value += r * r;
        grad[[i, j]] = 2.0 * r;
    }
    Ok((value, grad))
}

/// `(1/N) Σ_t ‖y_t - X_t w_t‖²` with `N = Σ_t n_t` (that is `T n` when all
/// tasks have `n` examples), and its gradient.
pub fn mtl_sq_loss(w: ArrayView2<'_, f64>, data: &TaskDataset) -> Result<(f64, Array2<f64>)> {
    let preds = data.predict(w)?;
    let scale = 1.0 / data.examples().max(1) as f64;
    let mut grad = Array2::zeros(w.dim());
    let mut value = 0.0;
    for (t, pred) in preds.into_iter().enumerate() {
        let resid = data.y(t) - &pred;
        value += resid.dot(&resid);
        let g = data.x(t).t().dot(&resid) * (-2.0 * scale);
        grad.column_mut(t).assign(&g);
    }
    Ok((value * scale, grad))
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `Σ_t Σ_i log(1 + exp(-y_ti ⟨w_t, x_ti⟩))` and its gradient. Targets must
/// be `±1`.
pub fn logistic_mtl_loss(w: ArrayView2<'_, f64>, data: &TaskDataset) -> Result<(f64, Array2<f64>)> {
    for t in 0..data.tasks() {
        if data.y(t).iter().any(|&y| y != 1.0 && y != -1.0) {
            return input(format!("task {t} has labels outside {{-1, +1}}"));
        }
    }
    let preds = data.predict(w)?;
    let mut grad = Array2::zeros(w.dim());
    let mut value = 0.0;
    for (t, pred) in preds.into_iter().enumerate() {
        let y = data.y(t);
        let coef: Array1<f64> = pred
            .iter()
            .zip(y.iter())
            .map(|(&p, &yi)| {
                let margin = yi * p;
                value += softplus(-margin);
                -yi * sigmoid(-margin)
            })
            .collect();
        grad.column_mut(t).assign(&data.x(t).t().dot(&coef));
    }
    Ok((value, grad))
}

/// Cluster seminorms `(Ω_m, Ω_b, Ω_w)` with `Ω_m = tr(W U Wᵀ)`,
/// `Ω_b = tr(W (M - U) Wᵀ)`, `Ω_w = tr(W (I - M) Wᵀ)` and `U = 11ᵀ/T`.
pub fn cluster_seminorms(
    w: ArrayView2<'_, f64>,
    info: &ConnectivityInfo,
) -> Result<(f64, f64, f64)> {
    let t = w.ncols();
    if info.tasks() != t {
        return param(format!(
            "partition covers {} tasks, matrix has {t} columns",
            info.tasks()
        ));
    }
    let mean = w.mean_axis(Axis(1)).expect("at least one column");
    let omega_m = t as f64 * mean.dot(&mean);

    let mut sums = Array2::<f64>::zeros((w.nrows(), info.clusters()));
    let mut sizes = vec![0usize; info.clusters()];
    for (col, &q) in info.assignment().iter().enumerate() {
        let mut s = sums.column_mut(q);
        s += &w.column(col);
        sizes[q] += 1;
    }
    let mut between = -omega_m;
    let mut within = 0.0;
    for q in 0..info.clusters() {
        let centre = &sums.column(q) / sizes[q] as f64;
        between += sizes[q] as f64 * centre.dot(&centre);
        for (col, &c) in info.assignment().iter().enumerate() {
            if c == q {
                let diff = &w.column(col) - &centre;
                within += diff.dot(&diff);
            }
        }
    }
    Ok((omega_m, between.max(0.0), within))
}

/// `ε_m tr(W U Wᵀ) = ε_m T ‖w̄‖²` and its gradient `2 ε_m W U`.
pub fn mean_penalty(w: ArrayView2<'_, f64>, eps_m: f64) -> Result<(f64, Array2<f64>)> {
    if !(eps_m >= 0.0 && eps_m.is_finite()) {
        return param(format!("eps_m must be nonnegative, got {eps_m}"));
    }
    let t = w.ncols();
    if t == 0 {
        return input("matrix has no columns");
    }
    let mean = w.mean_axis(Axis(1)).expect("nonempty");
    let value = eps_m * t as f64 * mean.dot(&mean);
    let mut grad = Array2::zeros(w.dim());
    let g = &mean * (2.0 * eps_m);
    for mut col in grad.columns_mut() {
        col.assign(&g);
    }
    Ok((value, grad))
}

/// A differentiable data-fit term for the proximal-gradient solver.
pub trait SmoothLoss {
    /// Shape `(d, T)` of the variable.
    fn shape(&self) -> (usize, usize);

    fn value_grad(&self, w: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)>;

    fn value(&self, w: ArrayView2<'_, f64>) -> Result<f64> {
        Ok(self.value_grad(w)?.0)
    }

    /// A Lipschitz constant of the gradient, when one is cheaply known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

/// Squared loss on observed cells.
#[derive(Debug, Clone)]
pub struct MaskedSquare(pub ObservationMask);

impl SmoothLoss for MaskedSquare {
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn value_grad(&self, w: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
        masked_sq_loss(w, &self.0)
    }

    fn value(&self, w: ArrayView2<'_, f64>) -> Result<f64> {
        self.0.check_shape(w)?;
        Ok(self
            .0
            .entries()
            .iter()
            .map(|&(i, j, y)| (w[[i, j]] - y).powi(2))
            .sum())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(2.0)
    }
}

/// Averaged multitask squared loss.
#[derive(Debug, Clone)]
pub struct MultitaskSquare {
    data: TaskDataset,
    lipschitz: f64,
}

impl MultitaskSquare {
    pub fn new(data: TaskDataset) -> Result<Self> {
        let scale = 2.0 / data.examples().max(1) as f64;
        let mut top = 0.0f64;
        for t in 0..data.tasks() {
            let s = thin_svd(data.x(t).view())?;
            top = top.max(s.sigma.first().copied().unwrap_or(0.0));
        }
        Ok(Self {
            data,
            lipschitz: scale * top * top,
        })
    }

    pub fn data(&self) -> &TaskDataset {
        &self.data
    }
}

impl SmoothLoss for MultitaskSquare {
    fn shape(&self) -> (usize, usize) {
        (self.data.features(), self.data.tasks())
    }

    fn value_grad(&self, w: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
        mtl_sq_loss(w, &self.data)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// Multitask logistic loss; no cheap Lipschitz constant is supplied, so the
/// solver backtracks.
#[derive(Debug, Clone)]
pub struct MultitaskLogistic(pub TaskDataset);

impl SmoothLoss for MultitaskLogistic {
    fn shape(&self) -> (usize, usize) {
        (self.0.features(), self.0.tasks())
    }

    fn value_grad(&self, w: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
        logistic_mtl_loss(w, &self.0)
    }
}

/// A loss plus `ε_m tr(W U Wᵀ)`.
pub struct WithMeanPenalty<L> {
    pub loss: L,
    pub eps_m: f64,
}

impl<L: SmoothLoss> SmoothLoss for WithMeanPenalty<L> {
    fn shape(&self) -> (usize, usize) {
        self.loss.shape()
    }

    fn value_grad(&self, w: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
        let (v, g) = self.loss.value_grad(w)?;
        if self.eps_m == 0.0 {
            return Ok((v, g));
        }
        let (pv, pg) = mean_penalty(w, self.eps_m)?;
        Ok((v + pv, g + pg))
    }

    fn lipschitz(&self) -> Option<f64> {
        // The mean penalty's gradient 2 ε_m W U has Lipschitz constant 2 ε_m.
        self.loss.lipschitz().map(|l| l + 2.0 * self.eps_m)
    }
}
