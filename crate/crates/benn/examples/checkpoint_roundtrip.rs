//! Model persistence: save a trained model as a `benn-v1` JSON
//! checkpoint, load it back, and verify that predictions are identical
//! to the last bit.
//!
//! ```bash
//! cargo run --example checkpoint_roundtrip
//! ```

use benn::checkpoint::Checkpoint;
use benn::datagen::gen_model_d;
use benn::ensemble::build_gauss_ensemble;
use benn::network::{BeltMode, StructuralParams};
use benn::trainer::{fit, predict_ensemble, predict_sufficient, TrainConfig};

fn main() -> benn::Result<()> {
    let train = gen_model_d(200, 8, 5)?;
    let params = StructuralParams::constant_width(8, 1, 16, 2, 1, 32, 10)?;
    let spec = build_gauss_ensemble(&train.y, 10, 17)?;
    let cfg = TrainConfig {
        epochs: 25,
        truncation: Some(1.0),
        ..TrainConfig::default_for(200, 9)
    };
    let result = fit(&train.x, &train.y, BeltMode::NonlinearCs, &params, &spec, &cfg)?;

    let dir = std::env::temp_dir().join("benn_checkpoint_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    Checkpoint::from_fit(&result).save(&path)?;
    println!(
        "saved {} parameters to {}",
        result.model.param_count(),
        path.display()
    );

    let restored = Checkpoint::load(&path)?.to_fit_result()?;
    let fresh = gen_model_d(50, 8, 6)?;
    let (z0, z1) = (
        predict_sufficient(&result, &fresh.x)?,
        predict_sufficient(&restored, &fresh.x)?,
    );
    let (g0, g1) = (
        predict_ensemble(&result, &fresh.x)?,
        predict_ensemble(&restored, &fresh.x)?,
    );
    assert_eq!(z0, z1, "sufficient predictors must match bit-for-bit");
    assert_eq!(g0, g1, "ensemble predictions must match bit-for-bit");
    println!("reloaded model reproduces all predictions exactly");

    // The document is self-describing.
    let text = std::fs::read_to_string(&path)?;
    let first_lines: Vec<&str> = text.lines().take(6).collect();
    println!("checkpoint head:\n{}", first_lines.join("\n"));
    Ok(())
}
