// Accelerated proximal gradient on a small matrix completion problem,
// comparing the trace norm, k-support norm and box-norm penalties.
//
// `cargo run --example fista`

use boxnorm::data::{gen_lowrank, relative_sq, split, CompletionProblem, SplitSpec};
use boxnorm::losses::MaskedSquare;
use boxnorm::solver::{solve_from_zero, Penalty, SolveConfig, StepRule};
use boxnorm::vecnorm::BoxParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let problem = split(
        &gen_lowrank(40, 3, true, 7)?,
        &SplitSpec::uniform(0.3, 0.1, 0.6, 7),
    )?;
    let loss = MaskedSquare(problem.train.clone());
    let truth = problem.reference(&problem.test);

    let penalties = [
        ("trace", 4.0, Penalty::Trace),
        ("ksup", 0.05, Penalty::KSupport(3)),
        (
            "box",
            0.05,
            Penalty::Box(BoxParams::from_k(0.01, 1.0, 3.0, 40)?),
        ),
    ];
    for (name, lambda, penalty) in penalties {
        let cfg = SolveConfig::synthetic(lambda, penalty);
        let rep = solve_from_zero(&loss, &cfg)?;
        let pred = CompletionProblem::gather(rep.w_hat.view(), &problem.test);
        println!(
            "{name:>5}: {:4} iterations, objective {:.4}, test error {:.4}",
            rep.iterations,
            rep.objective_trace.last().unwrap(),
            relative_sq(&pred, &truth)?
        );
    }

    // Without a Lipschitz bound the step is found by halving.
    let cfg = SolveConfig {
        step: StepRule::backtracking(),
        ..SolveConfig::synthetic(4.0, Penalty::Trace)
    };
    let rep = solve_from_zero(&loss, &cfg)?;
    println!("backtracking: {} iterations", rep.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
