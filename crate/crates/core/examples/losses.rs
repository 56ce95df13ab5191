// Smooth losses with their gradients: masked squared error for matrix
// completion, per-task squared and logistic losses, and the mean penalty.
//
// `cargo run --example losses`

use ndarray::{array, Array1, Array2};

use boxnorm::losses::{
    logistic_mtl_loss, mean_penalty, MaskedSquare, ObservationMask, SmoothLoss, TaskDataset,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let observed = ObservationMask::new(2, 3, vec![(0, 0, 1.0), (1, 2, -2.0), (0, 1, 0.5)])?;
    let loss = MaskedSquare(observed);
    let w = Array2::<f64>::zeros((2, 3));
    let (value, grad) = loss.value_grad(w.view())?;
    println!("masked loss at zero = {value}, gradient\n{grad}");

    let xs = vec![
        array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        array![[1.0, -1.0], [2.0, 0.0]],
    ];
    let ys = vec![
        Array1::from(vec![1.0, -1.0, 1.0]),
        Array1::from(vec![-1.0, 1.0]),
    ];
    let tasks = TaskDataset::new(xs, ys)?;
    let beta = array![[0.5, -0.2], [0.1, 0.3]];
    let (logistic, _) = logistic_mtl_loss(beta.view(), &tasks)?;
    println!("logistic loss over {} tasks = {logistic:.6}", tasks.tasks());

    // ε_m T ‖w̄‖², with w̄ the average task vector.
    let (penalty, _) = mean_penalty(beta.view(), 2.0)?;
    println!("mean penalty = {penalty:.6}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
