//! Linear sufficient dimension reduction: the belt sits directly after
//! the input with no activation, so its weight matrix spans the
//! estimated reduction subspace and can be compared with the true basis
//! by projection distance.
//!
//! ```bash
//! cargo run --release --example linear_sdr
//! ```

use benn::belt::extract_linear_basis;
use benn::datagen::gen_linear;
use benn::ensemble::build_gauss_ensemble;
use benn::metrics::projection_distance;
use benn::network::{BeltMode, StructuralParams};
use benn::trainer::{fit, TrainConfig};

fn main() -> benn::Result<()> {
    let (n, p, d) = (500, 10, 1);
    let ds = gen_linear(n, p, d, 0.2, 11)?;

    // Depth-zero reducer (single affine map), kernel ensemble of 20
    // transforms fitted by a two-layer regressor.
    let params = StructuralParams::constant_width(p, 0, 1, d, 2, 32, 20)?;
    let spec = build_gauss_ensemble(&ds.y, 20, 5)?;
    let cfg = TrainConfig {
        epochs: 200,
        learning_rate: 5e-3,
        ..TrainConfig::default_for(n, 1)
    };
    let result = fit(&ds.x, &ds.y, BeltMode::LinearCs, &params, &spec, &cfg)?;

    let estimated = extract_linear_basis(&result.model)?;
    let truth = ds.truth_basis.as_ref().expect("generator provides the basis");
    let dist = projection_distance(&estimated, truth)?;
    println!("projection distance to the true subspace: {dist:.3}");
    println!("(0 = identical span; sqrt(2) = orthogonal spans at d = 1)");
    Ok(())
}
