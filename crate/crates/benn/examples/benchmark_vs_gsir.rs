//! Accuracy and wall-clock comparison with the kernel baseline at small
//! scale. The kernel method factorizes an n x n matrix, so its cost
//! grows superlinearly with n, while the network's cost per epoch is
//! linear in n.
//!
//! ```bash
//! cargo run --release --example benchmark_vs_gsir
//! ```

use benn::datagen::gen_model_d;
use benn::ensemble::build_gauss_ensemble;
use benn::gsir::{gsir_fit, GsirConfig};
use benn::metrics::distance_correlation;
use benn::network::{BeltMode, StructuralParams};
use benn::trainer::{fit, predict_sufficient, TrainConfig};
use std::time::Instant;

fn main() -> benn::Result<()> {
    let p = 20;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "n", "benn dcor", "benn s", "gsir dcor", "gsir s"
    );
    for n in [250usize, 500, 1000] {
        let train = gen_model_d(n, p, 31)?;
        let test = gen_model_d(500, p, 32)?;

        let params = StructuralParams::constant_width(p, 2, 50, 1, 1, 200, 50)?;
        let spec = build_gauss_ensemble(&train.y, 50, 2)?;
        let cfg = TrainConfig {
            epochs: 60,
            ..TrainConfig::default_for(n, 7)
        };
        let t0 = Instant::now();
        let fitted = fit(&train.x, &train.y, BeltMode::NonlinearCs, &params, &spec, &cfg)?;
        let benn_secs = t0.elapsed().as_secs_f64();
        let z = predict_sufficient(&fitted, &test.x)?;
        let benn_dcor =
            distance_correlation(&z, test.truth.as_ref().unwrap())?.value;

        let t1 = Instant::now();
        let kernel = gsir_fit(&train.x, &train.y, &GsirConfig::new(1))?;
        let gsir_secs = t1.elapsed().as_secs_f64();
        // the kernel method scores its in-sample predictors
        let gsir_dcor =
            distance_correlation(&kernel.predictors, train.truth.as_ref().unwrap())?.value;

        println!(
            "{:>6} {:>10.3} {:>10.2} {:>10.3} {:>10.2}",
            n, benn_dcor, benn_secs, gsir_dcor, gsir_secs
        );
    }
    println!("\nnote: kernel cost grows like n^3; network cost like n per epoch");
    Ok(())
}
