//! Accuracy measures: distance correlation, projection-matrix distance
//! between linear subspaces, and the transformed-response test error.

use crate::ensemble::ensemble_matrix;
use crate::error::{BennError, Result};
use crate::trainer::{empirical_loss, predict_sufficient, FitResult};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// One evaluated metric, with optional per-replicate values when the
/// reported number is a mean over repetitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub name: String,
    pub value: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Vec<f64>>,
}

/// Sample distance correlation together with the degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceCorrelation {
    pub value: f64,
    /// True when either sample has zero distance variance (e.g. is
    /// constant); the value is 0 by convention in that case.
    pub degenerate: bool,
}

/// Biased (V-statistic) sample distance correlation between two samples
/// with common row count: Euclidean pairwise distances, double centering,
/// `dCor = dCov / sqrt(dVar_a * dVar_b)`. Returns 0 with the degenerate
/// flag when either distance variance vanishes.
pub fn distance_correlation(a: &Array2<f64>, b: &Array2<f64>) -> Result<DistanceCorrelation> {
    let n = a.nrows();
    if n != b.nrows() {
        return Err(BennError::Shape(format!(
            "samples have different sizes: {} vs {}",
            n,
            b.nrows()
        )));
    }
    if n < 2 {
        return Err(BennError::Param(
            "distance correlation needs at least 2 observations".into(),
        ));
    }
    let da = centered_distances(a);
    let db = centered_distances(b);

    let inv_n2 = 1.0 / (n * n) as f64;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in da.iter().zip(db.iter()) {
        cov += x * y;
        var_a += x * x;
        var_b += y * y;
    }
    cov *= inv_n2;
    var_a *= inv_n2;
    var_b *= inv_n2;

    if var_a <= 0.0 || var_b <= 0.0 {
        return Ok(DistanceCorrelation {
            value: 0.0,
            degenerate: true,
        });
    }
    let r2 = (cov / (var_a * var_b).sqrt()).max(0.0);
    Ok(DistanceCorrelation {
        value: r2.sqrt().min(1.0),
        degenerate: false,
    })
}

/// Pairwise Euclidean distance matrix, double centered so that all row
/// and column sums vanish.
fn centered_distances(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let xi = x.row(i);
        for j in (i + 1)..n {
            let mut s = 0.0;
            for (u, v) in xi.iter().zip(x.row(j).iter()) {
                let diff = u - v;
                s += diff * diff;
            }
            let dist = s.sqrt();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| d.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            d[[i, j]] += grand - row_means[i] - row_means[j];
        }
    }
    d
}

/// Frobenius distance between the orthogonal projections onto the column
/// spans of `b1` and `b2`. Both must have full column rank; the distance
/// depends only on the spans.
pub fn projection_distance(b1: &Array2<f64>, b2: &Array2<f64>) -> Result<f64> {
    if b1.nrows() != b2.nrows() {
        return Err(BennError::Shape(format!(
            "bases live in different ambient dimensions: {} vs {}",
            b1.nrows(),
            b2.nrows()
        )));
    }
    let q1 = orthonormal_basis(b1)?;
    let q2 = orthonormal_basis(b2)?;
    // Form the projections explicitly; the algebraic shortcut
    // d1 + d2 - 2|Q1^T Q2|_F^2 loses half the significant digits to
    // cancellation when the spans (nearly) coincide.
    let p1 = q1.dot(&q1.t());
    let p2 = q2.dot(&q2.t());
    let mut sq = 0.0;
    for (a, b) in p1.iter().zip(p2.iter()) {
        let diff = a - b;
        sq += diff * diff;
    }
    Ok(sq.sqrt())
}

/// Modified Gram-Schmidt with a rank check.
fn orthonormal_basis(b: &Array2<f64>) -> Result<Array2<f64>> {
    let (p, d) = (b.nrows(), b.ncols());
    if d == 0 || d > p {
        return Err(BennError::RankDeficient(format!(
            "basis must have between 1 and {p} columns, got {d}"
        )));
    }
    let scale = b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1e-300);
    let mut q = b.to_owned();
    for j in 0..d {
        for k in 0..j {
            let proj = q.column(k).dot(&q.column(j));
            let qk = q.column(k).to_owned();
            let mut col = q.column_mut(j);
            col.scaled_add(-proj, &qk);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        if norm <= 1e-10 * scale {
            return Err(BennError::RankDeficient(format!(
                "column {} is linearly dependent on the preceding columns",
                j + 1
            )));
        }
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(q)
}

/// Mean squared error of the truncated ensemble predictions on held-out
/// data, rescaled by `tau / (n * m)`; the test targets are rebuilt from
/// the training-time ensemble so anchors and bandwidths match exactly.
pub fn ensemble_mse(result: &FitResult, x_test: &Array2<f64>, y_test: &Array1<f64>) -> Result<f64> {
    if x_test.nrows() != y_test.len() {
        return Err(BennError::Shape(format!(
            "test predictors have {} rows but response has {} entries",
            x_test.nrows(),
            y_test.len()
        )));
    }
    let g = ensemble_matrix(&result.ensemble, y_test)?;
    empirical_loss(&result.model, x_test, &g, result.config.truncation)
}

/// Distance correlation between the fitted sufficient predictors on
/// `x_test` and a ground-truth predictor matrix.
pub fn sufficient_predictor_dcor(
    result: &FitResult,
    x_test: &Array2<f64>,
    truth: &Array2<f64>,
) -> Result<DistanceCorrelation> {
    let z = predict_sufficient(result, x_test)?;
    distance_correlation(&z, truth)
}
