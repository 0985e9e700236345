//! Reference kernel-based nonlinear reduction (generalized sliced
//! inverse regression).
//!
//! Both predictors and response are embedded through Gaussian Gram
//! matrices; the leading eigenvectors of the regularized operator
//!
//! ```text
//! (Gx + ridge*n*I)^-1 Gx Gy Gx (Gx + ridge*n*I)^-1
//! ```
//!
//! (with centered Grams) give the sufficient predictors `Gx v`. The
//! method needs an n x n factorization and eigensolve, which is what
//! makes it slow at large n; it serves as the accuracy and wall-clock
//! baseline for the belted-network estimator.

use crate::error::{BennError, Result};
use crate::rng;
use crate::stats;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

/// Kernel bandwidth choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSpec {
    /// Median of the pairwise Euclidean distances.
    MedianHeuristic,
    Fixed(f64),
}

/// Configuration of the reference method.
#[derive(Debug, Clone, PartialEq)]
pub struct GsirConfig {
    pub bandwidth_x: BandwidthSpec,
    pub bandwidth_y: BandwidthSpec,
    /// Ridge added as `ridge * n` to the predictor Gram before inversion.
    pub ridge_x: f64,
    /// Reserved for variants that also regularize the response side.
    pub ridge_y: f64,
    /// Number of sufficient predictors to extract.
    pub d: usize,
}

impl GsirConfig {
    pub fn new(d: usize) -> Self {
        Self {
            bandwidth_x: BandwidthSpec::MedianHeuristic,
            bandwidth_y: BandwidthSpec::MedianHeuristic,
            ridge_x: 1e-3,
            ridge_y: 1e-3,
            d,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(BennError::Param("d must be >= 1".into()));
        }
        for (name, v) in [("ridge_x", self.ridge_x), ("ridge_y", self.ridge_y)] {
            if !(v > 0.0) {
                return Err(BennError::Param(format!("{name} must be positive")));
            }
        }
        for (name, b) in [("bandwidth_x", self.bandwidth_x), ("bandwidth_y", self.bandwidth_y)] {
            if let BandwidthSpec::Fixed(s) = b {
                if !(s > 0.0) {
                    return Err(BennError::Param(format!("{name} must be positive")));
                }
            }
        }
        Ok(())
    }
}

/// Fitted reference model.
#[derive(Debug, Clone)]
pub struct GsirFit {
    /// n x d sufficient predictors (columns centered).
    pub predictors: Array2<f64>,
    /// The d leading eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
}

/// Gaussian Gram matrix `K[i,j] = exp(-|x_i - x_j|^2 / (2 sigma^2))`;
/// symmetric with unit diagonal by construction.
pub fn gram(x: &Array2<f64>, sigma: f64) -> Result<Array2<f64>> {
    if !(sigma > 0.0) {
        return Err(BennError::Bandwidth(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    let n = x.nrows();
    let denom = 2.0 * sigma * sigma;
    let mut k = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        k[[i, i]] = 1.0;
        let xi = x.row(i);
        for j in (i + 1)..n {
            let mut s = 0.0;
            for (a, b) in xi.iter().zip(x.row(j).iter()) {
                let diff = a - b;
                s += diff * diff;
            }
            let v = (-s / denom).exp();
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(k)
}

/// Median of the pairwise Euclidean distances between rows, the usual
/// default bandwidth. Fails when fewer than two distinct rows exist.
pub fn median_heuristic(x: &Array2<f64>) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(BennError::Bandwidth(
            "median heuristic needs at least two rows".into(),
        ));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for (a, b) in x.row(i).iter().zip(x.row(j).iter()) {
                let diff = a - b;
                s += diff * diff;
            }
            dists.push(s.sqrt());
        }
    }
    let med = stats::median(&dists);
    if !(med > 0.0) {
        return Err(BennError::Bandwidth(
            "median pairwise distance is zero; rows are (almost) all identical".into(),
        ));
    }
    Ok(med)
}

/// Double centering `Q K Q` with `Q = I - 11^T/n`: all row and column
/// sums of the result vanish.
pub fn center(k: &Array2<f64>) -> Array2<f64> {
    let n = k.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / n as f64).collect();
    let col_means: Vec<f64> = (0..n).map(|j| k.column(j).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    Array2::from_shape_fn((n, n), |(i, j)| {
        k[[i, j]] - row_means[i] - col_means[j] + grand
    })
}

fn resolve_bandwidth(spec: BandwidthSpec, x: &Array2<f64>) -> Result<f64> {
    match spec {
        BandwidthSpec::Fixed(s) => Ok(s),
        BandwidthSpec::MedianHeuristic => median_heuristic(x),
    }
}

/// Fits the reference method: returns the n x d sufficient predictors
/// and the d leading eigenvalues of the regression operator.
/// Deterministic; eigenvector signs are fixed so the first nonzero
/// coordinate is positive.
pub fn gsir_fit(x: &Array2<f64>, y: &Array1<f64>, cfg: &GsirConfig) -> Result<GsirFit> {
    cfg.validate()?;
    let n = x.nrows();
    if y.len() != n {
        return Err(BennError::Shape(format!(
            "predictor rows {n} do not match response length {}",
            y.len()
        )));
    }
    if n < cfg.d + 1 {
        return Err(BennError::Param(format!(
            "need at least d + 1 = {} observations, got {n}",
            cfg.d + 1
        )));
    }

    let y_mat = Array2::from_shape_fn((n, 1), |(i, _)| y[i]);
    let sigma_x = resolve_bandwidth(cfg.bandwidth_x, x)?;
    let sigma_y = resolve_bandwidth(cfg.bandwidth_y, &y_mat)?;
    let gx = center(&gram(x, sigma_x)?);
    let gy = center(&gram(&y_mat, sigma_y)?);

    // A = (Gx + ridge*n*I)^-1 Gx via one Cholesky solve with n
    // right-hand sides. Gx and its shifted version share an eigenbasis,
    // so A is symmetric positive semidefinite.
    let mut shifted = gx.clone();
    let shift = cfg.ridge_x * n as f64;
    for i in 0..n {
        shifted[[i, i]] += shift;
    }
    let a = cholesky_solve(&shifted, &gx)?;

    // M = A Gy A, the operator whose leading eigenvectors we want.
    let m = a.dot(&gy).dot(&a);
    let (mut vectors, eigenvalues) = leading_eigen_symmetric(&m, cfg.d)?;

    // Fix signs: first nonzero coordinate of each eigenvector positive.
    for j in 0..cfg.d {
        let flip = vectors
            .column(j)
            .iter()
            .find(|v| **v != 0.0)
            .is_some_and(|&lead| lead < 0.0);
        if flip {
            vectors.column_mut(j).mapv_inplace(|v| -v);
        }
    }
    let predictors = gx.dot(&vectors);
    Ok(GsirFit {
        predictors,
        eigenvalues,
        bandwidth_x: sigma_x,
        bandwidth_y: sigma_y,
    })
}

/// Solves `lhs * out = rhs` for symmetric positive definite `lhs`.
fn cholesky_solve(lhs: &Array2<f64>, rhs: &Array2<f64>) -> Result<Array2<f64>> {
    let n = lhs.nrows();
    let lhs_na = DMatrix::from_row_iterator(n, n, lhs.iter().copied());
    let chol = nalgebra::Cholesky::new(lhs_na).ok_or_else(|| {
        let diag: Vec<f64> = (0..n).map(|i| lhs[[i, i]]).collect();
        let max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        BennError::Numerical(format!(
            "ridge-shifted Gram is not positive definite (diagonal range [{min:.3e}, {max:.3e}]); \
             increase the ridge"
        ))
    })?;
    // nalgebra is column-major: copy rhs column by column.
    let mut rhs_na = DMatrix::zeros(n, rhs.ncols());
    for j in 0..rhs.ncols() {
        for i in 0..n {
            rhs_na[(i, j)] = rhs[[i, j]];
        }
    }
    chol.solve_mut(&mut rhs_na);
    Ok(Array2::from_shape_fn((n, rhs.ncols()), |(i, j)| rhs_na[(i, j)]))
}

/// Leading eigenpairs of a symmetric matrix by block subspace iteration
/// with a Rayleigh-Ritz step; the block is oversampled by two vectors
/// for robustness against clustered eigenvalues. Deterministic: the
/// start block comes from a fixed internal seed. Convergence is judged
/// on the eigenpair residuals `|M v - lambda v|`, not on the Ritz
/// values, which settle long before the vectors do.
fn leading_eigen_symmetric(m: &Array2<f64>, d: usize) -> Result<(Array2<f64>, Vec<f64>)> {
    let n = m.nrows();
    let block = (d + 2).min(n);
    let mut rng = rng::stream(0x6569_6765);
    let mut v = Array2::from_shape_fn((n, block), |_| rng::standard_normal(&mut rng));
    orthonormalize(&mut v)?;

    let max_iters = 2000;
    let mut worst_residual = f64::INFINITY;
    for _ in 0..max_iters {
        let w = m.dot(&v);
        let t = v.t().dot(&w);
        let (rot, values) = small_symmetric_eigen(&t)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BennError::Numerical(
                "eigensolver produced non-finite Ritz values".into(),
            ));
        }

        // Residuals of the d leading Ritz pairs: M (V r_j) = (W r_j).
        let ritz_vecs = v.dot(&rot);
        let m_ritz = w.dot(&rot);
        let scale = values[0].abs().max(1e-30);
        worst_residual = 0.0f64;
        for j in 0..d {
            let mut sq = 0.0;
            for i in 0..n {
                let r = m_ritz[[i, j]] - values[j] * ritz_vecs[[i, j]];
                sq += r * r;
            }
            worst_residual = worst_residual.max(sq.sqrt() / scale);
        }
        if worst_residual <= 1e-10 {
            let vectors = ritz_vecs.slice(ndarray::s![.., ..d]).to_owned();
            return Ok((vectors, values.into_iter().take(d).collect()));
        }

        let mut next = w;
        orthonormalize(&mut next)?;
        v = next;
    }
    Err(BennError::Numerical(format!(
        "subspace iteration did not converge in {max_iters} iterations \
         (relative residual {worst_residual:.3e}); the leading eigenvalues may be clustered"
    )))
}

/// Dense symmetric eigendecomposition for the small Rayleigh-Ritz block,
/// eigenpairs sorted by non-increasing eigenvalue.
fn small_symmetric_eigen(t: &Array2<f64>) -> Result<(Array2<f64>, Vec<f64>)> {
    let b = t.nrows();
    let sym = DMatrix::from_row_iterator(b, b, t.iter().copied());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((b, b), |(i, j)| eig.eigenvectors[(i, order[j])]);
    Ok((vectors, values))
}

/// In-place modified Gram-Schmidt on the columns.
fn orthonormalize(v: &mut Array2<f64>) -> Result<()> {
    for j in 0..v.ncols() {
        for k in 0..j {
            let proj = v.column(k).dot(&v.column(j));
            let prev = v.column(k).to_owned();
            v.column_mut(j).scaled_add(-proj, &prev);
        }
        let norm = v.column(j).dot(&v.column(j)).sqrt();
        if norm < 1e-300 {
            return Err(BennError::Numerical(
                "subspace iteration block collapsed".into(),
            ));
        }
        v.column_mut(j).mapv_inplace(|x| x / norm);
    }
    Ok(())
}
