//! Response transformation families.
//!
//! The regression target is not the raw response but a family of
//! transformations of it evaluated on a finite set of points: powers,
//! CDF indicators, sine/cosine pairs, Gaussian kernel sections anchored
//! at sampled response values, class indicators, or the identity. The
//! `m` transformed values of each observation form one row of the
//! target matrix fitted by the belted network.

use crate::error::{BennError, Result};
use crate::rng;
use crate::stats;
use ndarray::{Array1, Array2};

/// Transformation family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleFamily {
    /// Integer powers of the (optionally standardized) response.
    Moments,
    /// Indicators 1(y <= t_j) on a grid of thresholds.
    CdfIndicator,
    /// Alternating sin(t_j y), cos(t_j y) over a frequency grid.
    Fourier,
    /// Gaussian kernel sections exp(-(y_j - y)^2 / (2 sigma^2)) at anchors y_j.
    GaussKernel,
    /// The response itself (m = 1).
    Identity,
    /// Indicators 1(y = class_j) over the distinct response values.
    CategoricalIndicator,
}

/// A concrete, fully parameterized transformation family.
///
/// `t_grid` holds the family's evaluation points: exponents for
/// [`EnsembleFamily::Moments`], thresholds for CDF indicators, per-component
/// frequencies for Fourier, kernel anchors for the Gaussian family, class
/// values for categorical indicators, and is empty for the identity.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub t_grid: Vec<f64>,
    /// Grid length for Lebesgue-weighted families; 1.0 for families whose
    /// components are weighted by counting measure.
    pub tau: f64,
    /// Kernel bandwidth (Gaussian family only).
    pub sigma: Option<f64>,
    /// Uniform bound on |g|, where one exists.
    pub b_y: Option<f64>,
    pub m: usize,
    /// Response centering applied before the transform (moments family).
    pub center: Option<f64>,
    /// Response scaling applied before the transform (moments family).
    pub scale: Option<f64>,
}

/// Equally spaced grid `t_j = (j-1) * tau / m`, j = 1..m, so the implied
/// next point `t_{m+1}` is `tau` itself.
pub fn make_grid(tau: f64, m: usize) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(BennError::Param(format!("tau must be positive, got {tau}")));
    }
    if m == 0 {
        return Err(BennError::Param("grid size m must be >= 1".into()));
    }
    let step = tau / m as f64;
    Ok((0..m).map(|j| j as f64 * step).collect())
}

impl EnsembleSpec {
    /// Identity family: the single transform g(y) = y.
    pub fn identity() -> Self {
        Self {
            family: EnsembleFamily::Identity,
            t_grid: Vec::new(),
            tau: 1.0,
            sigma: None,
            b_y: None,
            m: 1,
            center: None,
            scale: None,
        }
    }

    /// Raw power family with exponents 1..=k.
    pub fn moments(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(BennError::Param("moments order k must be >= 1".into()));
        }
        Ok(Self {
            family: EnsembleFamily::Moments,
            t_grid: (1..=k).map(|j| j as f64).collect(),
            tau: 1.0,
            sigma: None,
            b_y: None,
            m: k,
            center: None,
            scale: None,
        })
    }

    /// Power family with exponents 1..=k applied to z-scores of the
    /// training response; the recorded bound is the empirical maximum of
    /// |z^j| over the training sample.
    pub fn moments_standardized(k: usize, y_train: &Array1<f64>) -> Result<Self> {
        let mut spec = Self::moments(k)?;
        let ys = as_slice(y_train);
        let (center, scale) = response_moments(ys)?;
        spec.center = Some(center);
        spec.scale = Some(scale);
        let mut b = 0.0f64;
        for &y in ys {
            let z = (y - center) / scale;
            for j in 1..=k {
                b = b.max(z.powi(j as i32).abs());
            }
        }
        spec.b_y = Some(b);
        Ok(spec)
    }

    /// CDF indicator family on `m` equally spaced thresholds covering the
    /// training response range widened by one standard deviation on each
    /// side.
    pub fn cdf_indicator(m: usize, y_train: &Array1<f64>) -> Result<Self> {
        if m == 0 {
            return Err(BennError::Param("ensemble size m must be >= 1".into()));
        }
        let ys = as_slice(y_train);
        let (_, sd) = response_moments(ys)?;
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min) - sd;
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) + sd;
        let range = hi - lo;
        let grid = make_grid(range, m)?;
        Ok(Self {
            family: EnsembleFamily::CdfIndicator,
            t_grid: grid.into_iter().map(|t| lo + t).collect(),
            tau: range,
            sigma: None,
            b_y: Some(1.0),
            m,
            center: None,
            scale: None,
        })
    }

    /// Sine/cosine family: components alternate sin(u y), cos(u y) over
    /// ceil(m/2) frequencies equally spaced on [0, tau).
    pub fn fourier(m: usize, tau: f64) -> Result<Self> {
        if m == 0 {
            return Err(BennError::Param("ensemble size m must be >= 1".into()));
        }
        let freqs = make_grid(tau, m.div_ceil(2))?;
        let t_grid = (0..m).map(|j| freqs[j / 2]).collect();
        Ok(Self {
            family: EnsembleFamily::Fourier,
            t_grid,
            tau,
            sigma: None,
            b_y: Some(1.0),
            m,
            center: None,
            scale: None,
        })
    }

    /// Class indicator family over the sorted distinct values of the
    /// training response.
    pub fn categorical(y_train: &Array1<f64>) -> Result<Self> {
        let mut classes: Vec<f64> = Vec::new();
        for &y in as_slice(y_train) {
            if !y.is_finite() {
                return Err(BennError::Param("categorical response must be finite".into()));
            }
            if !classes.contains(&y) {
                classes.push(y);
            }
        }
        if classes.is_empty() {
            return Err(BennError::DegenerateResponse("empty response sample".into()));
        }
        classes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = classes.len();
        Ok(Self {
            family: EnsembleFamily::CategoricalIndicator,
            t_grid: classes,
            tau: 1.0,
            sigma: None,
            b_y: Some(1.0),
            m,
            center: None,
            scale: None,
        })
    }

    pub fn n_classes(&self) -> Option<usize> {
        (self.family == EnsembleFamily::CategoricalIndicator).then_some(self.m)
    }
}

/// Gaussian kernel family built from the training response: `m` anchors
/// drawn i.i.d. uniform on [mean - 2 sd, mean + 2 sd] of `y_train`, with
/// bandwidth equal to the sample standard deviation. Deterministic given
/// the seed.
pub fn build_gauss_ensemble(y_train: &Array1<f64>, m: usize, seed: u64) -> Result<EnsembleSpec> {
    if m == 0 {
        return Err(BennError::Param("ensemble size m must be >= 1".into()));
    }
    let ys = as_slice(y_train);
    if ys.len() < 2 {
        return Err(BennError::DegenerateResponse(
            "need at least two response values".into(),
        ));
    }
    let (mu, sd) = response_moments(ys)?;
    let mut rng = rng::stream(seed);
    let anchors: Vec<f64> = (0..m)
        .map(|_| rng::uniform(&mut rng, mu - 2.0 * sd, mu + 2.0 * sd))
        .collect();
    Ok(EnsembleSpec {
        family: EnsembleFamily::GaussKernel,
        t_grid: anchors,
        tau: 1.0,
        sigma: Some(sd),
        b_y: Some(1.0),
        m,
        center: None,
        scale: None,
    })
}

/// Evaluates all `m` transforms of the family at a single response value.
pub fn apply_ensemble(spec: &EnsembleSpec, y: f64) -> Array1<f64> {
    match spec.family {
        EnsembleFamily::Identity => Array1::from_elem(1, y),
        EnsembleFamily::Moments => {
            let z = match (spec.center, spec.scale) {
                (Some(c), Some(s)) => (y - c) / s,
                _ => y,
            };
            Array1::from_iter(spec.t_grid.iter().map(|&e| z.powi(e as i32)))
        }
        EnsembleFamily::CdfIndicator => {
            Array1::from_iter(spec.t_grid.iter().map(|&t| f64::from(y <= t)))
        }
        EnsembleFamily::Fourier => Array1::from_iter(spec.t_grid.iter().enumerate().map(
            |(j, &t)| {
                if j % 2 == 0 {
                    (t * y).sin()
                } else {
                    (t * y).cos()
                }
            },
        )),
        EnsembleFamily::GaussKernel => {
            let sigma = spec.sigma.expect("gauss-kernel spec carries a bandwidth");
            let denom = 2.0 * sigma * sigma;
            Array1::from_iter(
                spec.t_grid
                    .iter()
                    .map(|&a| (-(a - y) * (a - y) / denom).exp()),
            )
        }
        EnsembleFamily::CategoricalIndicator => {
            Array1::from_iter(spec.t_grid.iter().map(|&c| f64::from(y == c)))
        }
    }
}

/// Target matrix of a training or test sample: row i holds the `m`
/// transforms of response i. Carries the grid length so losses can be
/// rescaled consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMatrix {
    pub values: Array2<f64>,
    pub tau: f64,
}

/// Builds the n x m transformed-response matrix for a sample.
pub fn ensemble_matrix(spec: &EnsembleSpec, y: &Array1<f64>) -> Result<EnsembleMatrix> {
    let n = y.len();
    let mut values = Array2::zeros((n, spec.m));
    for (i, &yi) in y.iter().enumerate() {
        let row = apply_ensemble(spec, yi);
        if row.len() != spec.m {
            return Err(BennError::Shape(format!(
                "family produced {} components, spec declares m = {}",
                row.len(),
                spec.m
            )));
        }
        values.row_mut(i).assign(&row);
    }
    // Families with an intrinsic bound must stay inside it.
    if let Some(b) = intrinsic_bound(spec.family) {
        let max = values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if !(max <= b + 1e-12) {
            return Err(BennError::Numerical(format!(
                "transform magnitude {max} exceeds family bound {b}"
            )));
        }
    }
    Ok(EnsembleMatrix { values, tau: spec.tau })
}

fn intrinsic_bound(family: EnsembleFamily) -> Option<f64> {
    match family {
        EnsembleFamily::CdfIndicator
        | EnsembleFamily::Fourier
        | EnsembleFamily::GaussKernel
        | EnsembleFamily::CategoricalIndicator => Some(1.0),
        EnsembleFamily::Moments | EnsembleFamily::Identity => None,
    }
}

fn as_slice(y: &Array1<f64>) -> &[f64] {
    y.as_slice().expect("contiguous response vector")
}

/// Mean and standard deviation of the response, rejecting samples that
/// are constant (or so close to constant that the rounding noise of the
/// mean is all that remains).
fn response_moments(ys: &[f64]) -> Result<(f64, f64)> {
    let mu = stats::mean(ys);
    let sd = stats::sample_sd(ys);
    let all_equal = ys.windows(2).all(|w| w[0] == w[1]);
    if all_equal || sd <= 1e-12 * (1.0 + mu.abs()) {
        return Err(BennError::DegenerateResponse(
            "response sample is constant".into(),
        ));
    }
    Ok((mu, sd))
}
