//! Architecture calculators: the optimal growth exponents, the
//! depth/width formulas, sample-size-driven suggestions, and the
//! matching error-rate reference curve.
//!
//! ```bash
//! cargo run --example architecture_tuning
//! ```

use benn::tuning::{
    depth_width, optimal_exponents, rate_bound, suggest_architecture, ArchitectureDrivers,
};

fn main() -> benn::Result<()> {
    let (p, d) = (50, 1);
    let e = optimal_exponents(p, d)?;
    println!("optimal exponents at p = {p}, d = {d}:");
    println!("  ensemble size  ~ n^{:.4}", e.ensemble);
    println!("  depth drivers  ~ n^{:.4} (constant depth)", e.depth_f);
    println!("  width drivers  ~ n^{:.4} / n^{:.4}", e.width_f, e.width_h);

    let drivers = ArchitectureDrivers { depth_f: 1, width_f: 16, depth_h: 1, width_h: 4 };
    let (l1, r1, l2, r2) = depth_width(&drivers, p, d, 10)?;
    println!("\ndepth/width from drivers {drivers:?} at m = 10:");
    println!("  reducer  {l1} layers of width {r1}");
    println!("  regressor {l2} layers of width {r2}");

    println!("\nsuggestions over sample sizes (p = {p}, d = {d}):");
    println!("{:>8} {:>6} {:>4} {:>6} {:>4} {:>6} {:>12}", "n", "m", "l1", "r1", "l2", "r2", "rate bound");
    for n in [500usize, 1000, 2000, 5000, 10_000, 50_000] {
        let s = suggest_architecture(n, p, d)?;
        println!(
            "{:>8} {:>6} {:>4} {:>6} {:>4} {:>6} {:>12.5}",
            n,
            s.m,
            s.l1,
            s.k1[0],
            s.l2,
            s.k2[0],
            rate_bound(n as f64, p)?
        );
    }
    Ok(())
}
