//! Architecture calculators.
//!
//! Depth/width formulas mapping abstract size drivers to concrete layer
//! counts and widths, the optimal growth exponents for the ensemble size
//! and network dimensions as functions of the sample size, and the
//! matching error-rate reference curve.

use crate::error::{BennError, Result};
use crate::network::StructuralParams;
use serde::{Deserialize, Serialize};

/// Abstract size drivers for the two sub-networks: depth drivers scale the
/// number of layers, width drivers scale the layer widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureDrivers {
    pub depth_f: usize,
    pub width_f: usize,
    pub depth_h: usize,
    pub width_h: usize,
}

/// Growth exponents (powers of n) for the tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateExponents {
    /// Ensemble size grows like n^ensemble.
    pub ensemble: f64,
    /// Depth-driver exponents for the reducer and regressor.
    pub depth_f: f64,
    pub depth_h: f64,
    /// Width-driver exponents for the reducer and regressor.
    pub width_f: f64,
    pub width_h: f64,
}

/// Floor of the integer k-th root, computed by binary search on `r^k <= n`
/// so that perfect powers are never off by one.
pub fn integer_root_floor(n: usize, k: usize) -> usize {
    assert!(k >= 1, "root order must be >= 1");
    if n <= 1 || k == 1 {
        return n;
    }
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match (mid as u128).checked_pow(k as u32) {
            Some(p) if p <= n as u128 => lo = mid,
            _ => hi = mid - 1,
        }
    }
    lo
}

/// Concrete layer counts and widths from the size drivers:
///
/// ```text
/// l1 = 12*depth_f + 14    r1 = max(4p*floor(width_f^(1/p)) + 3p, 12d*width_f + 8d)
/// l2 = 12*depth_h + 14    r2 = max(4d*floor(width_h^(1/d)) + 3d, 12m*width_h + 8m)
/// ```
pub fn depth_width(
    drivers: &ArchitectureDrivers,
    p: usize,
    d: usize,
    m: usize,
) -> Result<(usize, usize, usize, usize)> {
    for (name, v) in [
        ("depth_f", drivers.depth_f),
        ("width_f", drivers.width_f),
        ("depth_h", drivers.depth_h),
        ("width_h", drivers.width_h),
        ("p", p),
        ("d", d),
        ("m", m),
    ] {
        if v == 0 {
            return Err(BennError::Param(format!("{name} must be a positive integer")));
        }
    }
    let l1 = 12 * drivers.depth_f + 14;
    let r1 = (4 * p * integer_root_floor(drivers.width_f, p) + 3 * p)
        .max(12 * d * drivers.width_f + 8 * d);
    let l2 = 12 * drivers.depth_h + 14;
    let r2 = (4 * d * integer_root_floor(drivers.width_h, d) + 3 * d)
        .max(12 * m * drivers.width_h + 8 * m);
    Ok((l1, r1, l2, r2))
}

/// The exponent tuple minimizing the error bound, valid for `d <= p - 2`.
///
/// The optimality constraints fix `ensemble = p / ((p+2)(d+2))`,
/// `depth + width_f = p / (2p+4)`, equal depth exponents, and
/// `width_f = width_h + ensemble`. They leave one degree of freedom,
/// resolved here by taking constant depth (`depth_f = depth_h = 0`),
/// the cheapest member of the optimal family; every exponent is then
/// non-negative for all valid `(p, d)`.
pub fn optimal_exponents(p: usize, d: usize) -> Result<RateExponents> {
    if p == 0 || d == 0 {
        return Err(BennError::Param("p and d must be positive".into()));
    }
    if d + 2 > p {
        return Err(BennError::Param(format!(
            "the optimal-rate exponents require d <= p - 2, got p = {p}, d = {d}"
        )));
    }
    let (pf, df) = (p as f64, d as f64);
    let ensemble = pf / ((pf + 2.0) * (df + 2.0));
    let width_f = pf / (2.0 * pf + 4.0);
    Ok(RateExponents {
        ensemble,
        depth_f: 0.0,
        depth_h: 0.0,
        width_f,
        width_h: width_f - ensemble,
    })
}

/// Architecture suggestion for a given sample size, produced by raising n
/// to the optimal exponents and feeding the rounded drivers through
/// [`depth_width`].
pub fn suggest_architecture(n: usize, p: usize, d: usize) -> Result<StructuralParams> {
    if n < 2 {
        return Err(BennError::Param("sample size n must be >= 2".into()));
    }
    let exps = optimal_exponents(p, d)?;
    let nf = n as f64;
    let m = (nf.powf(exps.ensemble).round() as usize).max(1);
    let drivers = ArchitectureDrivers {
        depth_f: (nf.powf(exps.depth_f).round() as usize).max(1),
        width_f: (nf.powf(exps.width_f).round() as usize).max(1),
        depth_h: (nf.powf(exps.depth_h).round() as usize).max(1),
        width_h: (nf.powf(exps.width_h).round() as usize).max(1),
    };
    let (l1, r1, l2, r2) = depth_width(&drivers, p, d, m)?;
    StructuralParams::constant_width(p, l1, r1, d, l2, r2, m)
}

/// Reference error-rate curve `n^(-2/(p+2)) * ln n` (unit constant),
/// intended for plotting against measured errors.
pub fn rate_bound(n: f64, p: usize) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(BennError::Param("sample size n must be >= 2".into()));
    }
    if p == 0 {
        return Err(BennError::Param("p must be positive".into()));
    }
    Ok(n.powf(-2.0 / (p as f64 + 2.0)) * n.ln())
}
