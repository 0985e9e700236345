//! Nonlinear sufficient dimension reduction on the heteroscedastic
//! benchmark: train a belted network against a Gaussian-kernel ensemble
//! and measure how well the one-dimensional belt output tracks the true
//! two-dimensional sufficient predictors.
//!
//! ```bash
//! cargo run --release --example nonlinear_sdr
//! ```

use benn::datagen::gen_model_d;
use benn::ensemble::build_gauss_ensemble;
use benn::metrics::distance_correlation;
use benn::network::{BeltMode, StructuralParams};
use benn::trainer::{fit, predict_sufficient, TrainConfig};

fn main() -> benn::Result<()> {
    let (n_train, n_test, p) = (800, 500, 20);
    let train = gen_model_d(n_train, p, 7)?;
    let test = gen_model_d(n_test, p, 8)?;

    // One sufficient predictor through a narrow belt; 100 kernel
    // transforms of the response as regression targets.
    let params = StructuralParams::constant_width(p, 2, 50, 1, 1, 400, 100)?;
    let spec = build_gauss_ensemble(&train.y, 100, 99)?;
    let cfg = TrainConfig {
        epochs: 80,
        ..TrainConfig::default_for(n_train, 3)
    };

    println!("training {} parameters ...", {
        let probe = benn::build_benn(BeltMode::NonlinearCs, &params, 0)?;
        probe.param_count()
    });
    let result = fit(&train.x, &train.y, BeltMode::NonlinearCs, &params, &spec, &cfg)?;
    println!(
        "loss: first epoch {:.4}, last epoch {:.4}",
        result.loss_trace[0],
        result.loss_trace.last().unwrap()
    );

    let z_test = predict_sufficient(&result, &test.x)?;
    let truth = test.truth.as_ref().expect("generator provides truth");
    let dcor = distance_correlation(&z_test, truth)?;
    println!(
        "test distance correlation between belt output and truth: {:.3}",
        dcor.value
    );
    Ok(())
}
