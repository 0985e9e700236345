//! Tour of the response transformation families: what each one
//! evaluates, where its evaluation points come from, and what the
//! resulting target matrix looks like for a small sample.
//!
//! ```bash
//! cargo run --example ensemble_families
//! ```

use benn::ensemble::{
    apply_ensemble, build_gauss_ensemble, ensemble_matrix, make_grid, EnsembleSpec,
};
use ndarray::array;

fn show(label: &str, spec: &EnsembleSpec, y: &ndarray::Array1<f64>) -> benn::Result<()> {
    let g = ensemble_matrix(spec, y)?;
    println!("\n{label}");
    println!("  m = {}, tau = {}, bound = {:?}", spec.m, spec.tau, spec.b_y);
    println!("  grid/anchors: {:?}", spec.t_grid);
    for (i, row) in g.values.rows().into_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:6.3}")).collect();
        println!("  y = {:5.2} -> [{}]", y[i], cells.join(", "));
    }
    Ok(())
}

fn main() -> benn::Result<()> {
    let y = array![-1.0, 0.0, 0.5, 2.0];

    println!("equally spaced grid on [0, tau): {:?}", make_grid(1.0, 4)?);

    show("identity (m = 1): g(y) = y", &EnsembleSpec::identity(), &y)?;

    show(
        "moments (z-scored): g_j(y) = z^j",
        &EnsembleSpec::moments_standardized(3, &y)?,
        &y,
    )?;

    show(
        "cdf indicators: g_j(y) = 1(y <= t_j)",
        &EnsembleSpec::cdf_indicator(4, &y)?,
        &y,
    )?;

    show(
        "sine/cosine pairs: sin(t y), cos(t y)",
        &EnsembleSpec::fourier(4, 2.0)?,
        &y,
    )?;

    let gauss = build_gauss_ensemble(&y, 4, 13)?;
    show(
        "gaussian kernel sections: exp(-(y_k - y)^2 / (2 s^2))",
        &gauss,
        &y,
    )?;
    println!(
        "  single evaluation at y = 0.25: {:?}",
        apply_ensemble(&gauss, 0.25).to_vec()
    );

    let classes = array![0.0, 1.0, 2.0, 1.0, 0.0];
    show(
        "class indicators: g_j(y) = 1(y = class_j)",
        &EnsembleSpec::categorical(&classes)?,
        &classes,
    )?;
    Ok(())
}
