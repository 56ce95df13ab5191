// Multitask regression with clustered tasks: each task is a noisy copy of
// one of two prototypes, and spectral penalties couple the task vectors.
//
// `cargo run --example multitask`

use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use boxnorm::data::{split_tasks, task_rmse, SplitSpec};
use boxnorm::losses::{MultitaskSquare, TaskDataset};
use boxnorm::solver::{
    grid_search, log_grid, Evaluator, Penalty, PenaltyFamily, SearchOptions, SolveConfig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (features, tasks, per_task) = (10, 12, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let prototypes: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..features).map(|_| gauss()).collect())
        .collect();

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in 0..tasks {
        let beta: Array1<f64> = prototypes[t % 2]
            .iter()
            .map(|&p| p + 0.1 * gauss())
            .collect();
        let x = Array2::from_shape_simple_fn((per_task, features), &mut gauss);
        let y = x.dot(&beta) + Array1::from_shape_simple_fn(per_task, &mut gauss) * 0.5;
        xs.push(x);
        ys.push(y);
    }
    let parts = split_tasks(
        &TaskDataset::new(xs, ys)?,
        &SplitSpec::uniform(0.25, 0.25, 0.5, 5),
    )?;
    let loss = MultitaskSquare::new(parts.train.clone())?;

    let validation = |w: ArrayView2<'_, f64>| task_rmse(w, &parts.validation);
    let test = |w: ArrayView2<'_, f64>| task_rmse(w, &parts.test);
    let eval = Evaluator {
        validation: &validation,
        test: Some(&test),
    };
    let options = SearchOptions {
        base: SolveConfig::synthetic(1.0, Penalty::Frobenius),
        thresholds: None,
    };

    let lambdas = log_grid(1e-3, 1.0, 5);
    for family in [
        PenaltyFamily::Frobenius,
        PenaltyFamily::Trace,
        PenaltyFamily::KSupport { ks: vec![1, 2, 4] },
        PenaltyFamily::Box {
            ks: vec![1.0, 2.0],
            a_values: vec![0.01, 0.1],
            b: 1.0,
        },
    ] {
        let rep = grid_search(&loss, &family, &lambdas, &options, &eval)?;
        println!(
            "{:>5}: test RMSE {:.4} at λ = {:.4}",
            family.name(),
            rep.metrics["test"],
            rep.selected.lambda
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
