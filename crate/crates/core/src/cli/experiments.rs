//! Experiment drivers behind `complete` and `mtl`: repeated trials of a
//! validation grid search per penalty, aggregated into a results table.

use std::fmt::Write as _;

use ndarray::ArrayView2;

use crate::data::{
    gen_block_clustered, gen_lowrank, metric, split, split_tasks, task_rmse, CompletionProblem,
    MetricKind, SplitSpec,
};
use crate::error::{param, Result};
use crate::losses::{MaskedSquare, MultitaskSquare, SmoothLoss, TaskDataset};
use crate::solver::{
    grid_search_pair, Evaluator, GridOutcome, PenaltyFamily, SearchOptions, SolveConfig,
    SolveReport,
};

/// One row group of the results table: a penalty family with its `λ` grid,
/// solved either plainly or in the centered form.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub family: PenaltyFamily,
    pub lambdas: Vec<f64>,
    pub centered: bool,
}

impl Arm {
    /// `trace`, `c-trace`, and so on.
    pub fn label(&self) -> String {
        if self.centered {
            format!("c-{}", self.family.name())
        } else {
            self.family.name().to_string()
        }
    }
}

/// Where each trial's data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Noisy `d × d` rank-`rank` Gaussian product, regenerated per trial.
    LowRank { d: usize, rank: usize },
    /// Noisy block-diagonal matrix, regenerated per trial.
    Blocks {
        d: usize,
        blocks: usize,
        block_size: usize,
    },
    /// A fixed observed matrix, resplit per trial.
    Matrix(CompletionProblem),
    /// A fixed multitask regression dataset, resplit per trial.
    Tasks(TaskDataset),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub source: Source,
    pub arms: Vec<Arm>,
    pub trials: usize,
    pub seed: u64,
    /// Split fractions; `seed` and the trial index seed each split.
    pub split: SplitSpec,
    /// Solver template; `lambda`, `penalty` and `centered` are set per cell.
    pub base: SolveConfig,
    /// Threshold levels per solution, `None` for no thresholding.
    pub thresholds: Option<usize>,
    /// Completion error measure (ignored for multitask data, which uses the
    /// per-task RMSE).
    pub metric: MetricKind,
}

/// Scores of one selected model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub error: f64,
    pub rank: usize,
    pub lambda: f64,
    pub k: Option<f64>,
    pub a: Option<f64>,
}

impl Cell {
    fn from_report(rep: &SolveReport) -> Self {
        Self {
            error: rep.metrics.get("test").copied().unwrap_or(f64::NAN),
            rank: rep.rank_after_threshold,
            lambda: rep.selected.lambda,
            k: rep.selected.k,
            a: rep.selected.a,
        }
    }
}

/// Outcome of one arm on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmTrial {
    pub label: String,
    pub plain: Cell,
    pub thresholded: Option<Cell>,
    pub failed_cells: usize,
}

/// A line of the aggregated table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub penalty: String,
    pub thresholded: bool,
    pub error_mean: f64,
    pub error_std: f64,
    pub rank_mean: f64,
    pub k_mean: Option<f64>,
    pub a_mean: Option<f64>,
    pub lambda_mean: f64,
    pub trials: usize,
}

/// Per-trial results, ordered as `trials × arms`.
#[derive(Debug, Clone, PartialEq)]
pub struct Results {
    pub per_trial: Vec<Vec<ArmTrial>>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for a single value.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn mean_opt(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = xs.collect();
    v.filter(|v| !v.is_empty()).map(|v| mean(&v))
}

impl Results {
    /// Cells of arm `label` across trials.
    pub fn cells(&self, label: &str, thresholded: bool) -> Vec<Cell> {
        self.per_trial
            .iter()
            .flat_map(|t| t.iter().filter(|a| a.label == label))
            .filter_map(|a| {
                if thresholded {
                    a.thresholded
                } else {
                    Some(a.plain)
                }
            })
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.per_trial
            .first()
            .map(|t| t.iter().map(|a| a.label.clone()).collect())
            .unwrap_or_default()
    }

    /// Mean test error of an arm.
    pub fn mean_error(&self, label: &str, thresholded: bool) -> f64 {
        let errs: Vec<f64> = self
            .cells(label, thresholded)
            .iter()
            .map(|c| c.error)
            .collect();
        mean(&errs)
    }

    /// Unthresholded rows for every arm, then thresholded rows when present.
    pub fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        for thresholded in [false, true] {
            for label in self.labels() {
                let cells = self.cells(&label, thresholded);
                if cells.is_empty() {
                    continue;
                }
                let errs: Vec<f64> = cells.iter().map(|c| c.error).collect();
                let ranks: Vec<f64> = cells.iter().map(|c| c.rank as f64).collect();
                let lambdas: Vec<f64> = cells.iter().map(|c| c.lambda).collect();
                rows.push(Row {
                    penalty: label,
                    thresholded,
                    error_mean: mean(&errs),
                    error_std: std_dev(&errs),
                    rank_mean: mean(&ranks),
                    k_mean: mean_opt(cells.iter().map(|c| c.k)),
                    a_mean: mean_opt(cells.iter().map(|c| c.a)),
                    lambda_mean: mean(&lambdas),
                    trials: cells.len(),
                });
            }
        }
        rows
    }

    /// The table as CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("penalty,thresholded,test_error,std,rank,k,a,lambda,trials\n");
        let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        for r in self.rows() {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.2},{},{},{:.6e},{}",
                r.penalty,
                r.thresholded,
                r.error_mean,
                r.error_std,
                r.rank_mean,
                opt(r.k_mean),
                opt(r.a_mean),
                r.lambda_mean,
                r.trials
            );
        }
        out
    }
}

/// Runs every arm on one prepared problem.
fn run_arms(
    loss: &dyn SmoothLoss,
    eval: &Evaluator<'_>,
    exp: &Experiment,
) -> Result<Vec<ArmTrial>> {
    let mut out = Vec::with_capacity(exp.arms.len());
    for arm in &exp.arms {
        let options = SearchOptions {
            base: SolveConfig {
                centered: arm.centered,
                ..exp.base.clone()
            },
            thresholds: exp.thresholds,
        };
        let GridOutcome { plain, thresholded } =
            grid_search_pair(loss, &arm.family, &arm.lambdas, &options, eval)?;
        out.push(ArmTrial {
            label: arm.label(),
            plain: Cell::from_report(&plain),
            thresholded: thresholded.as_ref().map(Cell::from_report),
            failed_cells: plain.failed_cells,
        });
    }
    Ok(out)
}

/// Runs trial `index` of an experiment.
pub fn run_trial(exp: &Experiment, index: usize) -> Result<Vec<ArmTrial>> {
    let seed = exp.seed.wrapping_add(index as u64);
    let spec = SplitSpec { seed, ..exp.split };
    let problem = match &exp.source {
        Source::LowRank { d, rank } => split(&gen_lowrank(*d, *rank, true, seed)?, &spec)?,
        Source::Blocks {
            d,
            blocks,
            block_size,
        } => split(
            &gen_block_clustered(*d, *blocks, *block_size, true, seed)?,
            &spec,
        )?,
        Source::Matrix(p) => split(p, &spec)?,
        Source::Tasks(data) => {
            let parts = split_tasks(data, &spec)?;
            let loss = MultitaskSquare::new(parts.train)?;
            let validation = |w: ArrayView2<'_, f64>| task_rmse(w, &parts.validation);
            let test = |w: ArrayView2<'_, f64>| task_rmse(w, &parts.test);
            let eval = Evaluator {
                validation: &validation,
                test: Some(&test),
            };
            return run_arms(&loss, &eval, exp);
        }
    };
    let kind = exp.metric;
    let val_obs: Vec<f64> = problem.validation.entries().iter().map(|e| e.2).collect();
    let test_ref = problem.reference(&problem.test);
    let validation = |w: ArrayView2<'_, f64>| {
        metric(
            kind,
            &CompletionProblem::gather(w, &problem.validation),
            &val_obs,
            problem.range,
        )
    };
    let test = |w: ArrayView2<'_, f64>| {
        metric(
            kind,
            &CompletionProblem::gather(w, &problem.test),
            &test_ref,
            problem.range,
        )
    };
    let eval = Evaluator {
        validation: &validation,
        test: Some(&test),
    };
    let loss = MaskedSquare(problem.train.clone());
    run_arms(&loss, &eval, exp)
}

/// Runs all trials in order. `progress` is called after each trial.
pub fn run_experiment(
    exp: &Experiment,
    progress: &mut dyn FnMut(usize, &[ArmTrial]),
) -> Result<Results> {
    if exp.trials == 0 {
        return param("trials must be at least 1");
    }
    if exp.arms.is_empty() {
        return param("no penalties selected");
    }
    let mut per_trial = Vec::with_capacity(exp.trials);
    for i in 0..exp.trials {
        let t = run_trial(exp, i)?;
        progress(i, &t);
        per_trial.push(t);
    }
    Ok(Results { per_trial })
}
