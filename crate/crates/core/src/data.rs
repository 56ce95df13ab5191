//! Synthetic generators, rating-file loaders, train/validation/test splits
//! and evaluation metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::losses::{ObservationMask, TaskDataset};

/// A partially observed matrix with disjoint train, validation and test
/// cells. Freshly generated or loaded problems hold every observation in
/// `train` until [`split`] redistributes them.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionProblem {
    pub rows: usize,
    pub cols: usize,
    /// Noiseless matrix, when known.
    pub truth: Option<Array2<f64>>,
    pub train: ObservationMask,
    pub validation: ObservationMask,
    pub test: ObservationMask,
    pub range: (f64, f64),
}

impl CompletionProblem {
    fn unsplit(
        rows: usize,
        cols: usize,
        truth: Option<Array2<f64>>,
        entries: Vec<(usize, usize, f64)>,
        range: (f64, f64),
    ) -> Result<Self> {
        Ok(Self {
            rows,
            cols,
            truth,
            train: ObservationMask::new(rows, cols, entries)?,
            validation: ObservationMask::new(rows, cols, Vec::new())?,
            test: ObservationMask::new(rows, cols, Vec::new())?,
            range,
        })
    }

    /// Every observation: train, then validation, then test cells.
    pub fn pool(&self) -> Vec<(usize, usize, f64)> {
        let mut all = self.train.entries().to_vec();
        all.extend_from_slice(self.validation.entries());
        all.extend_from_slice(self.test.entries());
        all
    }

    /// Reference values on `mask`: the noiseless truth when known,
    /// otherwise the observed values.
    pub fn reference(&self, mask: &ObservationMask) -> Vec<f64> {
        match &self.truth {
            Some(t) => mask.entries().iter().map(|&(i, j, _)| t[[i, j]]).collect(),
            None => mask.entries().iter().map(|e| e.2).collect(),
        }
    }

    /// Entries of `w` on the cells of `mask`.
    pub fn gather(w: ArrayView2<'_, f64>, mask: &ObservationMask) -> Vec<f64> {
        mask.entries().iter().map(|&(i, j, _)| w[[i, j]]).collect()
    }

    /// Serialise as text: `rows cols`, `r_min r_max`, then one
    /// `row col value` line per observation, with the noiseless value as a
    /// fourth column when the truth is known.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.rows, self.cols);
        let _ = writeln!(out, "{} {}", self.range.0, self.range.1);
        for (i, j, v) in self.pool() {
            match &self.truth {
                Some(t) => {
                    let _ = writeln!(out, "{i} {j} {v} {}", t[[i, j]]);
                }
                None => {
                    let _ = writeln!(out, "{i} {j} {v}");
                }
            }
        }
        out
    }

    /// Inverse of [`CompletionProblem::to_text`]. All observations land in
    /// `train`. Cells missing from the file get a zero truth value.
    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (n1, dims) = lines
            .next()
            .ok_or_else(|| perr(1, "missing dimensions".into()))?;
        let dims = parse_numbers(dims).map_err(|m| perr(n1 + 1, m))?;
        if dims.len() != 2 || dims.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
            return Err(perr(n1 + 1, "expected `rows cols`".into()));
        }
        let (rows, cols) = (dims[0] as usize, dims[1] as usize);
        let (n2, range) = lines
            .next()
            .ok_or_else(|| perr(2, "missing range".into()))?;
        let range = parse_numbers(range).map_err(|m| perr(n2 + 1, m))?;
        if range.len() != 2 || !(range[0] <= range[1]) {
            return Err(perr(n2 + 1, "expected `r_min r_max`".into()));
        }
        let mut entries = Vec::new();
        let mut truth: Option<Array2<f64>> = None;
        let mut width = None;
        for (n, line) in lines {
            let f = parse_numbers(line).map_err(|m| perr(n + 1, m))?;
            if !(f.len() == 3 || f.len() == 4) || *width.get_or_insert(f.len()) != f.len() {
                return Err(perr(n + 1, "expected `row col value [truth]`".into()));
            }
            let (i, j) = (f[0], f[1]);
            if i < 0.0 || j < 0.0 || i.fract() != 0.0 || j.fract() != 0.0 {
                return Err(perr(n + 1, "indices must be nonnegative integers".into()));
            }
            let (i, j) = (i as usize, j as usize);
            if i >= rows || j >= cols {
                return Err(perr(
                    n + 1,
                    format!("cell ({i}, {j}) outside {rows}x{cols}"),
                ));
            }
            entries.push((i, j, f[2]));
            if f.len() == 4 {
                truth.get_or_insert_with(|| Array2::zeros((rows, cols)))[[i, j]] = f[3];
            }
        }
        let range = (range[0], range[1]);
        Self::unsplit(rows, cols, truth, entries, range)
            .map_err(|e| perr(0, format!("invalid observations: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&read(path)?, path)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_numbers(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("not a finite number: {s:?}"))
        })
        .collect()
}

fn value_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 0.0)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// `W = A Bᵀ (+ E)` with `A, B` of size `d × r` and i.i.d. standard
/// Gaussian entries; `E` is standard Gaussian noise. Every cell is
/// observed; `truth` is `A Bᵀ`.
pub fn gen_lowrank(d: usize, r: usize, noise: bool, seed: u64) -> Result<CompletionProblem> {
    if r == 0 || r > d {
        return param(format!("rank {r} must lie in 1..={d}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian(&mut rng, d, r);
    let b = gaussian(&mut rng, d, r);
    let truth = a.dot(&b.t());
    let observed = if noise {
        &truth + &gaussian(&mut rng, d, d)
    } else {
        truth.clone()
    };
    full_problem(observed, truth)
}

fn full_problem(observed: Array2<f64>, truth: Array2<f64>) -> Result<CompletionProblem> {
    let (rows, cols) = observed.dim();
    let entries: Vec<_> = ndarray::indices((rows, cols))
        .into_iter()
        .map(|(i, j)| (i, j, observed[[i, j]]))
        .collect();
    let range = value_range(observed.iter().copied());
    CompletionProblem::unsplit(rows, cols, Some(truth), entries, range)
}

/// `d × d` matrix with `blocks` diagonal blocks of size `block_size`, each
/// constant at an integer drawn uniformly from `1..=10`, zero elsewhere,
/// plus standard Gaussian noise when `noise` is set.
pub fn gen_block_clustered(
    d: usize,
    blocks: usize,
    block_size: usize,
    noise: bool,
    seed: u64,
) -> Result<CompletionProblem> {
    if blocks == 0 || block_size == 0 || blocks * block_size > d {
        return param(format!(
            "{blocks} blocks of size {block_size} do not fit in {d}x{d}"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth = Array2::zeros((d, d));
    for blk in 0..blocks {
        let value = rng.gen_range(1..=10) as f64;
        let span = blk * block_size..(blk + 1) * block_size;
        truth.slice_mut(ndarray::s![span.clone(), span]).fill(value);
    }
    let observed = if noise {
        &truth + &gaussian(&mut rng, d, d)
    } else {
        truth.clone()
    };
    full_problem(observed, truth)
}

/// Supported rating file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingFormat {
    /// `user<TAB>item<TAB>rating<TAB>timestamp` with 1-based ids, ratings in `[1, 5]`.
    MovielensTab,
    /// One user per line: a rating count then 100 ratings in `[-10, 10]`,
    /// `99` marking a missing rating.
    JesterCsv,
    /// One profile per line: 14 features then a rating in `[0, 10]`,
    /// comma or whitespace separated; consecutive runs of
    /// `profiles_per_task` lines form one task.
    LenkTable { profiles_per_task: usize },
}

pub const LENK_FEATURES: usize = 14;
const JESTER_ITEMS: usize = 100;
const JESTER_MISSING: f64 = 99.0;

/// What a rating file turns into.
#[derive(Debug, Clone, PartialEq)]
pub enum Ratings {
    Matrix(CompletionProblem),
    Tasks(TaskDataset),
}

pub fn load_ratings(path: &Path, format: RatingFormat) -> Result<Ratings> {
    let text = read(path)?;
    match format {
        RatingFormat::MovielensTab => parse_movielens(&text, path).map(Ratings::Matrix),
        RatingFormat::JesterCsv => parse_jester(&text, path).map(Ratings::Matrix),
        RatingFormat::LenkTable { profiles_per_task } => {
            parse_lenk(&text, path, profiles_per_task).map(Ratings::Tasks)
        }
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn dense_ids(ids: impl Iterator<Item = u64>) -> BTreeMap<u64, usize> {
    let mut map: BTreeMap<u64, usize> = ids.map(|id| (id, 0)).collect();
    for (pos, slot) in map.values_mut().enumerate() {
        *slot = pos;
    }
    map
}

fn parse_movielens(text: &str, path: &Path) -> Result<CompletionProblem> {
    let mut raw = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_error(path, n + 1, "expected 4 tab-separated fields"));
        }
        let id = |s: &str, what: &str| {
            s.trim()
                .parse::<u64>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| parse_error(path, n + 1, format!("bad {what} id {s:?}")))
        };
        let user = id(fields[0], "user")?;
        let item = id(fields[1], "item")?;
        let rating: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_error(path, n + 1, format!("bad rating {:?}", fields[2])))?;
        if !(1.0..=5.0).contains(&rating) {
            return Err(Error::Validation(format!(
                "{}:{}: rating {rating} outside [1, 5]",
                path.display(),
                n + 1
            )));
        }
        raw.push((user, item, rating, n + 1));
    }
    let users = dense_ids(raw.iter().map(|r| r.0));
    let items = dense_ids(raw.iter().map(|r| r.1));
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::with_capacity(raw.len());
    for (u, i, r, line) in raw {
        let cell = (users[&u], items[&i]);
        if !seen.insert(cell) {
            return Err(parse_error(
                path,
                line,
                format!("duplicate rating for user {u}, item {i}"),
            ));
        }
        entries.push((cell.0, cell.1, r));
    }
    CompletionProblem::unsplit(users.len(), items.len(), None, entries, (1.0, 5.0))
}

fn parse_jester(text: &str, path: &Path) -> Result<CompletionProblem> {
    let mut entries = Vec::new();
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_numbers(line).map_err(|m| parse_error(path, n + 1, m))?;
        if fields.len() != JESTER_ITEMS + 1 {
            return Err(parse_error(
                path,
                n + 1,
                format!(
                    "expected {} fields, found {}",
                    JESTER_ITEMS + 1,
                    fields.len()
                ),
            ));
        }
        for (j, &v) in fields[1..].iter().enumerate() {
            if v == JESTER_MISSING {
                continue;
            }
            if !(-10.0..=10.0).contains(&v) {
                return Err(Error::Validation(format!(
                    "{}:{}: rating {v} outside [-10, 10]",
                    path.display(),
                    n + 1
                )));
            }
            entries.push((rows, j, v));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_error(path, 0, "no rows"));
    }
    CompletionProblem::unsplit(rows, JESTER_ITEMS, None, entries, (-10.0, 10.0))
}

fn parse_lenk(text: &str, path: &Path, per_task: usize) -> Result<TaskDataset> {
    if per_task == 0 {
        return param("profiles_per_task must be positive");
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = parse_numbers(trimmed).map_err(|m| parse_error(path, n + 1, m))?;
        if fields.len() != LENK_FEATURES + 1 {
            return Err(parse_error(
                path,
                n + 1,
                format!(
                    "expected {} fields, found {}",
                    LENK_FEATURES + 1,
                    fields.len()
                ),
            ));
        }
        let rating = fields[LENK_FEATURES];
        if !(0.0..=10.0).contains(&rating) {
            return Err(Error::Validation(format!(
                "{}:{}: rating {rating} outside [0, 10]",
                path.display(),
                n + 1
            )));
        }
        rows.push(fields);
    }
    if rows.is_empty() || rows.len() % per_task != 0 {
        return Err(parse_error(
            path,
            0,
            format!(
                "{} profiles do not split into tasks of {per_task}",
                rows.len()
            ),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for chunk in rows.chunks(per_task) {
        xs.push(Array2::from_shape_fn(
            (per_task, LENK_FEATURES),
            |(i, j)| chunk[i][j],
        ));
        ys.push(
            chunk
                .iter()
                .map(|r| r[LENK_FEATURES])
                .collect::<Array1<f64>>(),
        );
    }
    TaskDataset::new(xs, ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Sample cells uniformly from the whole pool.
    Uniform,
    /// Sample within each row (user); the train count is rounded up so every
    /// row keeps at least one training entry.
    PerRow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
    pub mode: SplitMode,
}

impl SplitSpec {
    pub fn uniform(train: f64, validation: f64, test: f64, seed: u64) -> Self {
        Self {
            train,
            validation,
            test,
            seed,
            mode: SplitMode::Uniform,
        }
    }

    fn check(&self) -> Result<()> {
        let f = [self.train, self.validation, self.test];
        if f.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return param("split fractions must be positive");
        }
        if f.iter().sum::<f64>() > 1.0 + 1e-9 {
            return param("split fractions sum to more than 1");
        }
        Ok(())
    }

    /// Whether the fractions exhaust the pool, so test takes the remainder.
    fn exhaustive(&self) -> bool {
        self.train + self.validation + self.test >= 1.0 - 1e-9
    }

    /// `(train, validation, test)` counts out of `n`.
    fn counts(&self, n: usize, round_train_up: bool) -> (usize, usize, usize) {
        let nf = n as f64;
        let train = if round_train_up {
            (self.train * nf - 1e-9).ceil() as usize
        } else {
            (self.train * nf).round() as usize
        }
        .min(n);
        let val = ((self.validation * nf).round() as usize).min(n - train);
        let rest = n - train - val;
        let test = if self.exhaustive() {
            rest
        } else {
            ((self.test * nf).round() as usize).min(rest)
        };
        (train, val, test)
    }
}

/// Redistribute every observation of `problem` into train, validation and
/// test sets. Deterministic for a given seed.
pub fn split(problem: &CompletionProblem, spec: &SplitSpec) -> Result<CompletionProblem> {
    spec.check()?;
    let pool = problem.pool();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut tr, mut va, mut te) = (Vec::new(), Vec::new(), Vec::new());
    let mut assign = |mut cells: Vec<(usize, usize, f64)>, per_row: bool| {
        cells.shuffle(&mut rng);
        let (a, b, c) = spec.counts(cells.len(), per_row);
        tr.extend_from_slice(&cells[..a]);
        va.extend_from_slice(&cells[a..a + b]);
        te.extend_from_slice(&cells[a + b..a + b + c]);
    };
    match spec.mode {
        SplitMode::Uniform => {
            if pool.len() < 3 {
                return param(format!(
                    "{} observations cannot be split three ways",
                    pool.len()
                ));
            }
            assign(pool, false);
        }
        SplitMode::PerRow => {
            let mut by_row: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); problem.rows];
            for e in pool {
                by_row[e.0].push(e);
            }
            for mut cells in by_row {
                cells.sort_by_key(|e| e.1);
                if !cells.is_empty() {
                    assign(cells, true);
                }
            }
        }
    }
    if tr.is_empty() || va.is_empty() || te.is_empty() {
        return param("split leaves an empty train, validation or test set");
    }
    let (r, c) = (problem.rows, problem.cols);
    Ok(CompletionProblem {
        rows: r,
        cols: c,
        truth: problem.truth.clone(),
        train: ObservationMask::new(r, c, tr)?,
        validation: ObservationMask::new(r, c, va)?,
        test: ObservationMask::new(r, c, te)?,
        range: problem.range,
    })
}

/// Train, validation and test parts of a multitask dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSplits {
    pub train: TaskDataset,
    pub validation: TaskDataset,
    pub test: TaskDataset,
}

/// Split every task's examples with the same fractions.
pub fn split_tasks(data: &TaskDataset, spec: &SplitSpec) -> Result<TaskSplits> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut parts: [(Vec<Array2<f64>>, Vec<Array1<f64>>); 3] = Default::default();
    for t in 0..data.tasks() {
        let n = data.y(t).len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let (a, b, c) = spec.counts(n, false);
        if a == 0 || b == 0 || c == 0 {
            return param(format!("task {t} with {n} examples cannot be split"));
        }
        for (part, range) in parts.iter_mut().zip([0..a, a..a + b, a + b..a + b + c]) {
            let rows = &idx[range];
            part.0.push(data.x(t).select(ndarray::Axis(0), rows));
            part.1.push(rows.iter().map(|&i| data.y(t)[i]).collect());
        }
    }
    let [train, validation, test] = parts;
    Ok(TaskSplits {
        train: TaskDataset::new(train.0, train.1)?,
        validation: TaskDataset::new(validation.0, validation.1)?,
        test: TaskDataset::new(test.0, test.1)?,
    })
}

/// Completion error measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// `‖truth - pred‖² / ‖truth‖²`.
    RelativeSq,
    /// `Σ|truth - pred| / (n (r_max - r_min))`.
    Nmae,
    /// `‖truth - pred‖² / (n / (r_max - r_min))`, a squared-error variant
    /// selected on the command line as `nmae_display`.
    NmaeSquaredDisplay,
}

fn metric_error<T>(msg: &str) -> Result<T> {
    Err(Error::Metric(msg.into()))
}

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return metric_error("prediction and truth lengths differ");
    }
    if pred.is_empty() {
        return metric_error("no observations");
    }
    Ok(())
}

pub fn relative_sq(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return metric_error("truth is identically zero");
    }
    let num: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).powi(2)).sum();
    Ok(num / den)
}

fn check_range(range: (f64, f64)) -> Result<f64> {
    let width = range.1 - range.0;
    if !(width > 0.0 && width.is_finite()) {
        return metric_error("rating range must have positive width");
    }
    Ok(width)
}

pub fn nmae(pred: &[f64], truth: &[f64], range: (f64, f64)) -> Result<f64> {
    check_pair(pred, truth)?;
    let width = check_range(range)?;
    let abs: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).abs()).sum();
    Ok(abs / (pred.len() as f64 * width))
}

pub fn nmae_squared_display(pred: &[f64], truth: &[f64], range: (f64, f64)) -> Result<f64> {
    check_pair(pred, truth)?;
    let width = check_range(range)?;
    let sq: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).powi(2)).sum();
    Ok(sq / (pred.len() as f64 / width))
}

pub fn metric(kind: MetricKind, pred: &[f64], truth: &[f64], range: (f64, f64)) -> Result<f64> {
    match kind {
        MetricKind::RelativeSq => relative_sq(pred, truth),
        MetricKind::Nmae => nmae(pred, truth, range),
        MetricKind::NmaeSquaredDisplay => nmae_squared_display(pred, truth, range),
    }
}

/// Per-task RMSE averaged over tasks.
pub fn task_rmse(w: ArrayView2<'_, f64>, data: &TaskDataset) -> Result<f64> {
    let preds = data.predict(w)?;
    let mut total = 0.0;
    for (t, p) in preds.iter().enumerate() {
        let y = data.y(t);
        if y.is_empty() {
            return metric_error("task without examples");
        }
        let mse = (y - p).mapv(|r| r * r).sum() / y.len() as f64;
        total += mse.sqrt();
    }
    Ok(total / data.tasks() as f64)
}

/// Fraction of rows of `x` whose `argmax_t ⟨w_t, x⟩` equals the label.
/// Ties go to the lowest class index.
pub fn multiclass_accuracy(
    w: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    labels: &[usize],
) -> Result<f64> {
    if x.nrows() != labels.len() {
        return metric_error("label count differs from example count");
    }
    if labels.is_empty() {
        return metric_error("no examples");
    }
    if x.ncols() != w.nrows() {
        return metric_error("feature dimension mismatch");
    }
    let scores = x.dot(&w);
    let hits = scores
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(row, &label)| {
            let mut best = 0;
            for (t, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = t;
                }
            }
            best == label
        })
        .count();
    Ok(hits as f64 / labels.len() as f64)
}
