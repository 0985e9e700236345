//! Categorical responses: the class-indicator ensemble turns the fit
//! into least-squares estimation of the conditional class probabilities,
//! and the belt output separates the classes in a low-dimensional space.
//!
//! ```bash
//! cargo run --release --example categorical_response
//! ```

use benn::ensemble::EnsembleSpec;
use benn::network::{BeltMode, StructuralParams};
use benn::rng;
use benn::trainer::{fit, predict_ensemble, TrainConfig};
use ndarray::{Array1, Array2};

fn main() -> benn::Result<()> {
    // Three classes arranged by the sign pattern of two latent directions.
    let n = 600;
    let p = 6;
    let mut r = rng::stream(3);
    let x = Array2::from_shape_fn((n, p), |_| rng::standard_normal(&mut r));
    let y = Array1::from_shape_fn(n, |i| {
        let u = x[[i, 0]] + 0.5 * x[[i, 1]];
        let v = x[[i, 2]] - x[[i, 3]];
        if u > 0.3 {
            2.0
        } else if v > 0.0 {
            1.0
        } else {
            0.0
        }
    });

    let spec = EnsembleSpec::categorical(&y)?;
    let classes = spec.t_grid.clone();
    println!("classes found in the response: {classes:?}");

    let params = StructuralParams::constant_width(p, 1, 24, 2, 1, 24, classes.len())?;
    let cfg = TrainConfig {
        epochs: 150,
        learning_rate: 5e-3,
        ..TrainConfig::default_for(n, 11)
    };
    let result = fit(
        &x,
        &y,
        BeltMode::Categorical(classes.len()),
        &params,
        &spec,
        &cfg,
    )?;

    // The m outputs estimate P(y = class_j | x): classify by the argmax.
    let probs = predict_ensemble(&result, &x)?;
    let mut correct = 0usize;
    for i in 0..n {
        let row = probs.row(i);
        let (best, _) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if classes[best] == y[i] {
            correct += 1;
        }
    }
    println!(
        "training accuracy of the argmax classifier: {:.1}%",
        100.0 * correct as f64 / n as f64
    );
    println!(
        "final training loss: {:.4}",
        result.loss_trace.last().unwrap()
    );
    Ok(())
}
