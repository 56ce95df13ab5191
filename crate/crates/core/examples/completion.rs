// Matrix completion with validation: split a generated problem, sweep a
// penalty family over a λ grid, and threshold the singular values of each
// solution to pick a rank.
//
// `cargo run --example completion`

use ndarray::ArrayView2;

use boxnorm::data::{gen_block_clustered, relative_sq, split, CompletionProblem, SplitSpec};
use boxnorm::losses::MaskedSquare;
use boxnorm::solver::{
    grid_search_pair, log_grid, Evaluator, Penalty, PenaltyFamily, SearchOptions, SolveConfig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Five constant 8x8 blocks on the diagonal of a 40x40 matrix.
    let full = gen_block_clustered(40, 5, 8, true, 11)?;
    let problem = split(&full, &SplitSpec::uniform(0.4, 0.1, 0.5, 11))?;
    let loss = MaskedSquare(problem.train.clone());

    let score = |mask: &boxnorm::losses::ObservationMask, reference: Vec<f64>| {
        let mask = mask.clone();
        move |w: ArrayView2<'_, f64>| relative_sq(&CompletionProblem::gather(w, &mask), &reference)
    };
    let validation = score(
        &problem.validation,
        problem.validation.entries().iter().map(|e| e.2).collect(),
    );
    let test = score(&problem.test, problem.reference(&problem.test));
    let eval = Evaluator {
        validation: &validation,
        test: Some(&test),
    };
    let options = SearchOptions {
        base: SolveConfig::synthetic(1.0, Penalty::Trace),
        thresholds: Some(10),
    };

    let families = [
        (PenaltyFamily::Trace, log_grid(1.0, 30.0, 4)),
        (
            PenaltyFamily::KSupport { ks: vec![1, 5] },
            log_grid(0.01, 1.0, 3),
        ),
        (
            PenaltyFamily::Box {
                ks: vec![5.0],
                a_values: vec![0.01],
                b: 1.0,
            },
            log_grid(0.01, 1.0, 3),
        ),
    ];
    for (family, lambdas) in &families {
        let out = grid_search_pair(&loss, family, lambdas, &options, &eval)?;
        let t = out.thresholded.expect("thresholding is on");
        println!(
            "{:>5}: test {:.4} (raw {:.4}), rank {} at λ = {:.3}",
            family.name(),
            t.metrics["test"],
            out.plain.metrics["test"],
            t.rank_after_threshold,
            t.selected.lambda
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
