//! Conditional-mean reduction: with the identity ensemble (m = 1) the
//! network output estimates E[y | x] directly, and the belt carries the
//! predictor that drives the regression function.
//!
//! ```bash
//! cargo run --release --example conditional_mean
//! ```

use benn::datagen::gen_model_d;
use benn::ensemble::EnsembleSpec;
use benn::network::{BeltMode, StructuralParams};
use benn::trainer::{fit, predict_ensemble, TrainConfig};

fn main() -> benn::Result<()> {
    let (n_train, n_test, p) = (800, 400, 10);
    let train = gen_model_d(n_train, p, 21)?;
    let test = gen_model_d(n_test, p, 22)?;

    let params = StructuralParams::constant_width(p, 2, 40, 1, 1, 40, 1)?;
    let cfg = TrainConfig {
        epochs: 120,
        ..TrainConfig::default_for(n_train, 4)
    };
    let result = fit(
        &train.x,
        &train.y,
        BeltMode::NonlinearCms,
        &params,
        &EnsembleSpec::identity(),
        &cfg,
    )?;

    // In this generator the conditional mean of y given x is exactly the
    // first true predictor, so the fitted values can be scored against it.
    let predicted = predict_ensemble(&result, &test.x)?;
    let truth = test.truth.as_ref().expect("generator provides truth");
    let mse: f64 = (0..n_test)
        .map(|i| {
            let e = predicted[[i, 0]] - truth[[i, 0]];
            e * e
        })
        .sum::<f64>()
        / n_test as f64;
    let var: f64 = {
        let mean = truth.column(0).sum() / n_test as f64;
        truth.column(0).iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_test as f64
    };
    println!("test MSE against the true conditional mean: {mse:.4}");
    println!("variance of the true conditional mean:      {var:.4}");
    println!("fraction unexplained: {:.3}", mse / var);
    Ok(())
}
