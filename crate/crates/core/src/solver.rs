//! Accelerated proximal gradient (FISTA) with spectral penalties, the
//! centered formulation `W = V + z 1ᵀ`, rank thresholding and validation
//! grid search.
//!
//! The objective is `loss(W) + λ P(W)` where `P` is one of
//!
//! | penalty        | `P(W)`                       |
//! |----------------|------------------------------|
//! | `Frobenius`    | `‖W‖²_F`                     |
//! | `Trace`        | `‖W‖_tr`                     |
//! | `ElasticNet`   | `‖W‖_tr + (γ/2)‖W‖²_F`       |
//! | `KSupport(k)`  | `‖W‖²_(k)` (spectral)        |
//! | `Box(p)`       | `‖W‖²_box` (spectral)        |
//!
//! Box parameters refer to `T` coordinates (one per column), as produced by
//! [`crate::spectral::cluster_to_box`]; when `d < T` they are restricted to
//! the `d` singular values with [`crate::spectral::restrict_box`].

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{param, Error, Result};
use crate::losses::SmoothLoss;
use crate::spectral::{prox_spectrum, restrict_box, SpectralPenalty};
use crate::svd::{thin_svd, thin_svd_warm, SvdFactors, SvdWorkspace};
use crate::vecnorm::{box_norm, k_support_norm, BoxParams, KSupportParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Frobenius,
    Trace,
    ElasticNet { gamma: f64 },
    KSupport(usize),
    Box(BoxParams),
}

impl Penalty {
    pub fn name(&self) -> &'static str {
        match self {
            Penalty::Frobenius => "fr",
            Penalty::Trace => "trace",
            Penalty::ElasticNet { .. } => "elnet",
            Penalty::KSupport(_) => "ksup",
            Penalty::Box(_) => "box",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Step `1/L` from the loss's Lipschitz constant.
    Fixed,
    /// Start at `init`, multiply by `eta` until the quadratic upper bound holds.
    /// The accepted step carries over to the next iteration.
    Backtracking { eta: f64, init: f64 },
}

impl StepRule {
    pub fn backtracking() -> Self {
        StepRule::Backtracking {
            eta: 0.5,
            init: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub lambda: f64,
    pub penalty: Penalty,
    /// Stop when the relative objective change drops below `tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub step: StepRule,
    pub centered: bool,
    /// Candidate singular value thresholds; empty means no thresholding.
    pub threshold_grid: Vec<f64>,
}

impl SolveConfig {
    /// Tolerance `1e-5`, used for the synthetic experiments.
    pub fn synthetic(lambda: f64, penalty: Penalty) -> Self {
        Self {
            lambda,
            penalty,
            tol: 1e-5,
            max_iter: 10_000,
            step: StepRule::Fixed,
            centered: false,
            threshold_grid: Vec::new(),
        }
    }

    /// Tolerance `1e-3`, used for real-data completion.
    pub fn real(lambda: f64, penalty: Penalty) -> Self {
        Self {
            tol: 1e-3,
            ..Self::synthetic(lambda, penalty)
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return param(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.tol > 0.0) {
            return param(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return param("max_iter must be at least 1");
        }
        if let StepRule::Backtracking { eta, init } = self.step {
            if !(eta > 0.0 && eta < 1.0 && init > 0.0) {
                return param("backtracking needs 0 < eta < 1 and init > 0");
            }
        }
        if let Penalty::ElasticNet { gamma } = self.penalty {
            if !(gamma >= 0.0 && gamma.is_finite()) {
                return param(format!(
                    "elastic net gamma must be nonnegative, got {gamma}"
                ));
            }
        }
        if self.threshold_grid.iter().any(|t| !(*t >= 0.0)) {
            return param("threshold grid entries must be nonnegative");
        }
        Ok(())
    }
}

/// Hyperparameters behind a report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub lambda: f64,
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub gamma: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub w_hat: Array2<f64>,
    pub z_hat: Option<Array1<f64>>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub selected: Selection,
    pub rank_after_threshold: usize,
    pub metrics: BTreeMap<String, f64>,
    /// Grid cells whose solve failed and were skipped.
    pub failed_cells: usize,
}

/// Relative tolerance for counting singular values as nonzero.
fn numeric_rank(sigma: &[f64], shape: (usize, usize)) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    let tol = top * shape.0.max(shape.1) as f64 * f64::EPSILON;
    sigma.iter().filter(|&&s| s > tol).count()
}

/// Penalty evaluation and prox with a reusable SVD workspace.
struct PenaltyOp {
    penalty: Penalty,
    lambda: f64,
    ws: SvdWorkspace,
    shape: (usize, usize),
}

impl PenaltyOp {
    fn new(penalty: Penalty, lambda: f64, shape: (usize, usize)) -> Result<Self> {
        let r = shape.0.min(shape.1);
        match penalty {
            Penalty::KSupport(k) => KSupportParams::new(k).check(r)?,
            Penalty::Box(p) => {
                restrict_box(&p, shape.1, r)?;
            }
            _ => {}
        }
        Ok(Self {
            penalty,
            lambda,
            ws: SvdWorkspace::new(),
            shape,
        })
    }

    fn spectral(&self) -> Option<(SpectralPenalty, f64)> {
        let r = self.shape.0.min(self.shape.1);
        match self.penalty {
            Penalty::Frobenius => None,
            Penalty::Trace => Some((SpectralPenalty::Trace, 1.0)),
            Penalty::ElasticNet { gamma } => Some((SpectralPenalty::ElasticNet { gamma }, 1.0)),
            Penalty::KSupport(k) => Some((SpectralPenalty::SqKSupport(k), 2.0)),
            Penalty::Box(p) => Some((
                SpectralPenalty::SqBox(
                    restrict_box(&p, self.shape.1, r).expect("validated at construction"),
                ),
                2.0,
            )),
        }
    }

    /// `P` evaluated on a spectrum.
    fn value_of_spectrum(&self, sigma: &[f64]) -> Result<f64> {
        Ok(match self.spectral().map(|s| s.0) {
            None => sigma.iter().map(|s| s * s).sum(),
            Some(SpectralPenalty::Trace) => sigma.iter().sum(),
            Some(SpectralPenalty::ElasticNet { gamma }) => {
                sigma.iter().sum::<f64>() + 0.5 * gamma * sigma.iter().map(|s| s * s).sum::<f64>()
            }
            Some(SpectralPenalty::SqKSupport(k)) => {
                k_support_norm(sigma, &KSupportParams::new(k))?.0.powi(2)
            }
            Some(SpectralPenalty::SqBox(p)) => box_norm(sigma, &p)?.0.powi(2),
        })
    }

    /// `λ P(W)`.
    fn value(&self, w: ArrayView2<'_, f64>) -> Result<f64> {
        if self.lambda == 0.0 {
            return Ok(0.0);
        }
        if let Penalty::Frobenius = self.penalty {
            return Ok(self.lambda * w.iter().map(|x| x * x).sum::<f64>());
        }
        let f = thin_svd(w)?;
        Ok(self.lambda * self.value_of_spectrum(&f.sigma)?)
    }

    /// `prox_{s λ P}(w)` and `λ P` at the result.
    fn prox(&mut self, w: Array2<f64>, step: f64) -> Result<(Array2<f64>, f64)> {
        if self.lambda == 0.0 {
            return Ok((w, 0.0));
        }
        let scale = step * self.lambda;
        match self.spectral() {
            None => {
                let x = w / (1.0 + 2.0 * scale);
                let v = self.lambda * x.iter().map(|x| x * x).sum::<f64>();
                Ok((x, v))
            }
            Some((pen, factor)) => {
                let f = thin_svd_warm(w.view(), &mut self.ws)?;
                let shrunk = prox_spectrum(&f.sigma, &pen, factor * scale)?;
                let v = self.lambda * self.value_of_spectrum(&shrunk)?;
                Ok((f.reconstruct_with(&shrunk), v))
            }
        }
    }
}

fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn numeric_error(iteration: usize, message: impl Into<String>) -> Error {
    Error::Numeric {
        iteration,
        message: message.into(),
    }
}

fn converged(prev: f64, cur: f64, tol: f64) -> bool {
    (cur - prev).abs() / prev.abs().max(1e-12) < tol
}

/// Variables of the (possibly centered) problem: `W = V + z 1ᵀ`.
#[derive(Clone)]
struct Point {
    v: Array2<f64>,
    z: Option<Array1<f64>>,
}

impl Point {
    fn assemble(&self) -> Array2<f64> {
        match &self.z {
            None => self.v.clone(),
            Some(z) => &self.v + &z.view().insert_axis(Axis(1)),
        }
    }

    fn extrapolate(&self, prev: &Point, beta: f64) -> Point {
        Point {
            v: &self.v + &((&self.v - &prev.v) * beta),
            z: self
                .z
                .as_ref()
                .zip(prev.z.as_ref())
                .map(|(z, zp)| z + &((z - zp) * beta)),
        }
    }
}

/// The FISTA loop shared by the plain and centered solvers.
///
/// In the centered case the smooth part is `f(V, z) = loss(V + z 1ᵀ)` with
/// `∇_V f = G` and `∇_z f = G 1`. Steps are taken in the metric
/// `‖ΔV‖² + T ‖Δz‖²`, in which `f` is `2L`-smooth, so `z` moves by
/// `(s/T) G 1` while the prox acts on `V` alone.
fn run(loss: &dyn SmoothLoss, cfg: &SolveConfig, start: Point) -> Result<(Point, Vec<f64>, usize)> {
    cfg.check()?;
    let shape = loss.shape();
    if start.v.dim() != shape {
        return Err(Error::Input(format!(
            "initial point is {:?}, loss expects {:?}",
            start.v.dim(),
            shape
        )));
    }
    let centered = start.z.is_some();
    let tasks = shape.1 as f64;
    let mut op = PenaltyOp::new(cfg.penalty, cfg.lambda, shape)?;

    let curvature = if centered { 2.0 } else { 1.0 };
    let mut step = match cfg.step {
        StepRule::Fixed => {
            let l = loss.lipschitz().ok_or_else(|| {
                Error::Parameter("fixed step needs a loss with a Lipschitz constant".into())
            })?;
            if !(l > 0.0) {
                return param(format!("Lipschitz constant must be positive, got {l}"));
            }
            1.0 / (curvature * l)
        }
        StepRule::Backtracking { init, .. } => init,
    };

    let mut x = start.clone();
    let mut prev_obj = loss.value(x.assemble().view())? + op.value(x.v.view())?;
    if !prev_obj.is_finite() {
        return Err(numeric_error(
            0,
            "objective at the initial point is not finite",
        ));
    }
    let mut trace = vec![prev_obj];
    let mut y = start;
    let mut t = 1.0f64;
    let mut iterations = 0;

    for iter in 1..=cfg.max_iter {
        iterations = iter;
        let wy = y.assemble();
        let (fy, g) = loss.value_grad(wy.view())?;
        let gz = centered.then(|| g.sum_axis(Axis(1)));

        let (next, fx, px) = loop {
            let v_in = &y.v - &(&g * step);
            let (v, px) = op.prox(v_in, step)?;
            let z =
                y.z.as_ref()
                    .zip(gz.as_ref())
                    .map(|(z, gz)| z - &(gz * (step / tasks)));
            let cand = Point { v, z };
            let wx = cand.assemble();
            let fx = loss.value(wx.view())?;
            match cfg.step {
                StepRule::Fixed => break (cand, fx, px),
                StepRule::Backtracking { eta, .. } => {
                    let dv = &cand.v - &y.v;
                    let mut lin = inner(&g, &dv);
                    let mut quad = frob_sq(&dv);
                    if let (Some(zc), Some(zy), Some(gz)) = (&cand.z, &y.z, &gz) {
                        let dz = zc - zy;
                        lin += gz.dot(&dz);
                        quad += tasks * dz.dot(&dz);
                    }
                    let bound = fy + lin + quad / (2.0 * step);
                    if fx <= bound + 1e-12 * fy.abs().max(1.0) || !fx.is_finite() && step < 1e-300 {
                        break (cand, fx, px);
                    }
                    step *= eta;
                    if step < 1e-300 {
                        return Err(numeric_error(iter, "backtracking step underflow"));
                    }
                }
            }
        };

        let obj = fx + px;
        if !obj.is_finite() {
            return Err(numeric_error(iter, "objective is not finite"));
        }
        trace.push(obj);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = next.extrapolate(&x, (t - 1.0) / t_next);
        x = next;
        t = t_next;
        if converged(prev_obj, obj, cfg.tol) {
            break;
        }
        prev_obj = obj;
    }
    Ok((x, trace, iterations))
}

fn report(
    point: Point,
    trace: Vec<f64>,
    iterations: usize,
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    let w_hat = point.assemble();
    let sigma = thin_svd(w_hat.view())?.sigma;
    let rank = numeric_rank(&sigma, w_hat.dim());
    let mut selected = Selection {
        lambda: cfg.lambda,
        ..Selection::default()
    };
    match cfg.penalty {
        Penalty::KSupport(k) => selected.k = Some(k as f64),
        Penalty::Box(p) => {
            selected.a = Some(p.a);
            selected.k = Some(p.rho(w_hat.ncols()));
        }
        Penalty::ElasticNet { gamma } => selected.gamma = Some(gamma),
        _ => {}
    }
    Ok(SolveReport {
        w_hat,
        z_hat: point.z,
        objective_trace: trace,
        iterations,
        selected,
        rank_after_threshold: rank,
        metrics: BTreeMap::new(),
        failed_cells: 0,
    })
}

/// Minimise `loss(W) + λ P(W)` from `w0`. The report holds the last
/// primal iterate.
pub fn fista(
    loss: &dyn SmoothLoss,
    cfg: &SolveConfig,
    w0: ArrayView2<'_, f64>,
) -> Result<SolveReport> {
    let (x, trace, iters) = run(
        loss,
        cfg,
        Point {
            v: w0.to_owned(),
            z: None,
        },
    )?;
    report(x, trace, iters, cfg)
}

/// Minimise `loss(V + z 1ᵀ) + λ P(V)` over `(V, z)`. The prox acts on `V`
/// only; the report carries `W = V + z 1ᵀ` and `z`.
pub fn solve_centered(
    loss: &dyn SmoothLoss,
    cfg: &SolveConfig,
    v0: ArrayView2<'_, f64>,
    z0: &Array1<f64>,
) -> Result<SolveReport> {
    if z0.len() != v0.nrows() {
        return param(format!(
            "mean vector has length {}, expected {}",
            z0.len(),
            v0.nrows()
        ));
    }
    let (x, trace, iters) = run(
        loss,
        cfg,
        Point {
            v: v0.to_owned(),
            z: Some(z0.clone()),
        },
    )?;
    report(x, trace, iters, cfg)
}

/// Zero initial point (and zero mean) for a loss.
pub fn solve_from_zero(loss: &dyn SmoothLoss, cfg: &SolveConfig) -> Result<SolveReport> {
    let (d, t) = loss.shape();
    let w0 = Array2::zeros((d, t));
    if cfg.centered {
        solve_centered(loss, cfg, w0.view(), &Array1::zeros(d))
    } else {
        fista(loss, cfg, w0.view())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholded {
    pub w: Array2<f64>,
    pub rank: usize,
    pub tau: f64,
    pub score: f64,
}

/// `n` log-spaced thresholds from `1e-4 σ₁` to `σ₁`.
pub fn default_threshold_grid(sigma1: f64, n: usize) -> Vec<f64> {
    if sigma1 <= 0.0 || n == 0 {
        return vec![0.0];
    }
    if n == 1 {
        return vec![sigma1];
    }
    let lo = (1e-4 * sigma1).ln();
    let hi = sigma1.ln();
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Zero every singular value below `τ` for each `τ` in `grid` and keep the
/// reconstruction with the smallest `validator` score (first in grid order
/// on ties).
pub fn threshold_rank(
    w: ArrayView2<'_, f64>,
    grid: &[f64],
    validator: &dyn Fn(ArrayView2<'_, f64>) -> Result<f64>,
) -> Result<Thresholded> {
    let f = thin_svd(w)?;
    threshold_factors(&f, w.dim(), grid, validator)
}

fn threshold_factors(
    f: &SvdFactors,
    shape: (usize, usize),
    grid: &[f64],
    validator: &dyn Fn(ArrayView2<'_, f64>) -> Result<f64>,
) -> Result<Thresholded> {
    if grid.is_empty() {
        return param("threshold grid is empty");
    }
    let base_rank = numeric_rank(&f.sigma, shape);
    let mut best: Option<Thresholded> = None;
    for &tau in grid {
        let kept: Vec<f64> = f
            .sigma
            .iter()
            .enumerate()
            .map(|(i, &s)| if i < base_rank && s >= tau { s } else { 0.0 })
            .collect();
        let rank = kept.iter().filter(|&&s| s > 0.0).count();
        let wt = f.reconstruct_with(&kept);
        let score = validator(wt.view())?;
        if best.as_ref().map_or(true, |b| score < b.score) {
            best = Some(Thresholded {
                w: wt,
                rank,
                tau,
                score,
            });
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Penalty family searched by [`grid_search`], with its own grids.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyFamily {
    Frobenius,
    Trace,
    ElasticNet {
        gammas: Vec<f64>,
    },
    KSupport {
        ks: Vec<usize>,
    },
    /// `a` ranges over `a_values` with `b` fixed; `k` may be fractional and
    /// sets `c = (b - a) k + T a`.
    Box {
        ks: Vec<f64>,
        a_values: Vec<f64>,
        b: f64,
    },
}

impl PenaltyFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyFamily::Frobenius => "fr",
            PenaltyFamily::Trace => "trace",
            PenaltyFamily::ElasticNet { .. } => "elnet",
            PenaltyFamily::KSupport { .. } => "ksup",
            PenaltyFamily::Box { .. } => "box",
        }
    }

    /// All `(penalty, selection-without-λ)` pairs for `T` columns.
    fn members(&self, tasks: usize) -> Result<Vec<(Penalty, Selection)>> {
        let sel = Selection::default();
        Ok(match self {
            PenaltyFamily::Frobenius => vec![(Penalty::Frobenius, sel)],
            PenaltyFamily::Trace => vec![(Penalty::Trace, sel)],
            PenaltyFamily::ElasticNet { gammas } => gammas
                .iter()
                .map(|&gamma| {
                    (
                        Penalty::ElasticNet { gamma },
                        Selection {
                            gamma: Some(gamma),
                            ..Selection::default()
                        },
                    )
                })
                .collect(),
            PenaltyFamily::KSupport { ks } => ks
                .iter()
                .map(|&k| {
                    (
                        Penalty::KSupport(k),
                        Selection {
                            k: Some(k as f64),
                            ..Selection::default()
                        },
                    )
                })
                .collect(),
            PenaltyFamily::Box { ks, a_values, b } => {
                let mut out = Vec::new();
                for &k in ks {
                    for &a in a_values {
                        out.push((
                            Penalty::Box(BoxParams::from_k(a, *b, k, tasks)?),
                            Selection {
                                k: Some(k),
                                a: Some(a),
                                ..Selection::default()
                            },
                        ));
                    }
                }
                out
            }
        })
    }
}

/// `n` log-spaced values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The default `λ` grid: 10 log-spaced values in `[1e-4, 1e2]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-4, 1e2, 10)
}

/// Validation and (optional) test scores, lower is better.
pub struct Evaluator<'a> {
    pub validation: &'a dyn Fn(ArrayView2<'_, f64>) -> Result<f64>,
    pub test: Option<&'a dyn Fn(ArrayView2<'_, f64>) -> Result<f64>>,
}

/// Options for [`grid_search`] beyond the family and `λ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Template for every cell; `lambda` and `penalty` are overwritten.
    pub base: SolveConfig,
    /// Threshold the singular values of each solution with this many
    /// log-spaced levels (see [`default_threshold_grid`]); `None` disables
    /// thresholding.
    pub thresholds: Option<usize>,
}

/// Ordering key: score, then smaller `λ`, smaller `k`, larger `a`.
fn better(score: f64, sel: &Selection, best_score: f64, best: &Selection) -> bool {
    if score != best_score {
        return score < best_score;
    }
    if sel.lambda != best.lambda {
        return sel.lambda < best.lambda;
    }
    let (k, bk) = (sel.k.unwrap_or(0.0), best.k.unwrap_or(0.0));
    if k != bk {
        return k < bk;
    }
    sel.a.unwrap_or(0.0) > best.a.unwrap_or(0.0)
}

/// Best cells of one sweep: scored on the raw solutions and, when
/// thresholding is enabled, on the thresholded ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub plain: SolveReport,
    pub thresholded: Option<SolveReport>,
}

struct Best {
    entry: Option<(f64, SolveReport)>,
}

impl Best {
    fn offer(&mut self, score: f64, rep: SolveReport) {
        let replace = self
            .entry
            .as_ref()
            .map_or(true, |(s, b)| better(score, &rep.selected, *s, &b.selected));
        if replace {
            self.entry = Some((score, rep));
        }
    }

    fn finish(self, failed: usize, eval: &Evaluator<'_>) -> Result<Option<SolveReport>> {
        let Some((score, mut rep)) = self.entry else {
            return Ok(None);
        };
        rep.failed_cells = failed;
        rep.metrics.insert("validation".into(), score);
        if let Some(test) = eval.test {
            rep.metrics.insert("test".into(), test(rep.w_hat.view())?);
        }
        Ok(Some(rep))
    }
}

fn threshold_grid_for(options: &SearchOptions, sigma1: f64) -> Option<Vec<f64>> {
    if !options.base.threshold_grid.is_empty() {
        return Some(options.base.threshold_grid.clone());
    }
    options
        .thresholds
        .map(|n| default_threshold_grid(sigma1, n))
}

/// Exhaustive search over `lambdas × family`, solving each cell from zero.
///
/// Every cell is scored on its raw solution. With thresholding enabled
/// (`options.thresholds`, or a nonempty `base.threshold_grid` which takes
/// precedence) each cell also gets its best validation threshold, and a
/// second winner is tracked on those scores. Ties go to smaller `λ`, then
/// smaller `k`, then larger `a`. Failed cells are skipped and counted. The
/// winners carry `"validation"` and, with a test evaluator, `"test"` in
/// their metrics.
pub fn grid_search_pair(
    loss: &dyn SmoothLoss,
    family: &PenaltyFamily,
    lambdas: &[f64],
    options: &SearchOptions,
    eval: &Evaluator<'_>,
) -> Result<GridOutcome> {
    if lambdas.is_empty() {
        return param("lambda grid is empty");
    }
    let members = family.members(loss.shape().1)?;
    if members.is_empty() {
        return param(format!("{} grid is empty", family.name()));
    }
    let thresholding = options.thresholds.is_some() || !options.base.threshold_grid.is_empty();
    let mut plain = Best { entry: None };
    let mut thresholded = Best { entry: None };
    let mut failed = 0;
    let mut last_error = None;
    for &lambda in lambdas {
        for (penalty, sel) in &members {
            let cfg = SolveConfig {
                lambda,
                penalty: *penalty,
                threshold_grid: Vec::new(),
                ..options.base.clone()
            };
            let outcome = solve_from_zero(loss, &cfg).and_then(|mut rep| {
                rep.selected = Selection {
                    lambda,
                    ..sel.clone()
                };
                let score = (eval.validation)(rep.w_hat.view())?;
                let cut = if thresholding {
                    let f = thin_svd(rep.w_hat.view())?;
                    let sigma1 = f.sigma.first().copied().unwrap_or(0.0);
                    let grid = threshold_grid_for(options, sigma1).expect("thresholding is on");
                    let th = threshold_factors(&f, rep.w_hat.dim(), &grid, eval.validation)?;
                    let mut trep = rep.clone();
                    trep.w_hat = th.w;
                    trep.rank_after_threshold = th.rank;
                    trep.selected.threshold = Some(th.tau);
                    Some((th.score, trep))
                } else {
                    None
                };
                Ok((score, rep, cut))
            });
            match outcome {
                Ok((score, rep, cut)) if score.is_finite() => {
                    plain.offer(score, rep);
                    if let Some((ts, trep)) = cut.filter(|(ts, _)| ts.is_finite()) {
                        thresholded.offer(ts, trep);
                    }
                }
                Ok(_) => failed += 1,
                Err(e) => {
                    failed += 1;
                    last_error = Some(e);
                }
            }
        }
    }
    let Some(plain) = plain.finish(failed, eval)? else {
        return Err(last_error
            .unwrap_or_else(|| numeric_error(0, "every grid cell gave a non-finite score")));
    };
    Ok(GridOutcome {
        plain,
        thresholded: thresholded.finish(failed, eval)?,
    })
}

/// [`grid_search_pair`] returning a single winner: the thresholded one when
/// thresholding is enabled, the raw one otherwise.
pub fn grid_search(
    loss: &dyn SmoothLoss,
    family: &PenaltyFamily,
    lambdas: &[f64],
    options: &SearchOptions,
    eval: &Evaluator<'_>,
) -> Result<SolveReport> {
    let out = grid_search_pair(loss, family, lambdas, options, eval)?;
    match out.thresholded {
        Some(t) => Ok(t),
        None if options.thresholds.is_none() && options.base.threshold_grid.is_empty() => {
            Ok(out.plain)
        }
        None => Err(numeric_error(0, "no thresholded cell gave a finite score")),
    }
}
