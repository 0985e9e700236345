//! Belt placement: translating a reduction target into a model layout.
//!
//! Placing the width-d belt directly after the input with no activation
//! makes the sufficient predictor an affine map `B^T x + b`, which is the
//! linear reduction setting; placing it between two deep stacks gives the
//! nonlinear setting. The ensemble choice selects the estimation target:
//! a distribution-determining family for the conditional distribution,
//! the identity for the conditional mean, powers for moments, and class
//! indicators for categorical responses.

use crate::ensemble::{EnsembleFamily, EnsembleSpec};
use crate::error::{BennError, Result};
use crate::network::{
    init_network, Activation, BeltMode, BennModel, InitScheme, StructuralParams,
};
use crate::rng;
use ndarray::Array2;

/// Builds a seeded model realizing the given belt mode.
///
/// Linear modes require a depth-zero reducer (`l1 = 0`); moment and
/// categorical modes pin the output dimension. Violations are reported as
/// configuration errors naming the invariant.
pub fn build_benn(mode: BeltMode, params: &StructuralParams, seed: u64) -> Result<BennModel> {
    params.validate()?;
    check_mode_params(mode, params)?;

    // Uniform biases spread the hidden-unit kinks across the input range;
    // with zero biases and a one-dimensional belt every regressor unit
    // would kink at the same point.
    let scheme = InitScheme::UniformFanIn;
    let mut reducer = init_network(params.p, &params.k1, params.d, rng::derive_seed(seed, 0), scheme)?;
    if mode.is_linear() {
        // Single affine map; no activation anywhere in the reducer.
        reducer.activation = Activation::None;
    }
    let regressor = init_network(params.d, &params.k2, params.m, rng::derive_seed(seed, 1), scheme)?;
    Ok(BennModel {
        reducer,
        regressor,
        mode,
        params: params.clone(),
    })
}

fn check_mode_params(mode: BeltMode, params: &StructuralParams) -> Result<()> {
    match mode {
        BeltMode::LinearCs | BeltMode::LinearCms => {
            if params.l1 != 0 {
                return Err(BennError::Config(format!(
                    "{mode} requires a depth-zero reducer (single affine map), got l1 = {}",
                    params.l1
                )));
            }
        }
        BeltMode::NonlinearCs | BeltMode::NonlinearCms => {}
        BeltMode::KthMoment(k) => {
            if k == 0 {
                return Err(BennError::Config("kth-moment order must be >= 1".into()));
            }
            if params.m != k {
                return Err(BennError::Config(format!(
                    "kth-moment({k}) fixes the output dimension to k, got m = {}",
                    params.m
                )));
            }
        }
        BeltMode::Categorical(classes) => {
            if params.m != classes {
                return Err(BennError::Config(format!(
                    "categorical({classes}) fixes the output dimension to the class count, got m = {}",
                    params.m
                )));
            }
        }
    }
    if matches!(mode, BeltMode::LinearCms | BeltMode::NonlinearCms) && params.m != 1 {
        return Err(BennError::Config(format!(
            "{mode} targets the scalar conditional mean and requires m = 1, got m = {}",
            params.m
        )));
    }
    Ok(())
}

/// Checks that an ensemble family is admissible for a belt mode.
pub fn validate_mode_ensemble(mode: BeltMode, spec: &EnsembleSpec) -> Result<()> {
    match mode {
        BeltMode::LinearCms | BeltMode::NonlinearCms => {
            if spec.family != EnsembleFamily::Identity {
                return Err(BennError::Config(format!(
                    "{mode} requires the identity ensemble, got {:?}",
                    spec.family
                )));
            }
        }
        BeltMode::KthMoment(k) => {
            if spec.family != EnsembleFamily::Moments {
                return Err(BennError::Config(format!(
                    "kth-moment({k}) requires the moments ensemble, got {:?}",
                    spec.family
                )));
            }
            let expected: Vec<f64> = (1..=k).map(|j| j as f64).collect();
            if spec.m != k || spec.t_grid != expected {
                return Err(BennError::Config(format!(
                    "kth-moment({k}) requires exponents 1..={k}"
                )));
            }
        }
        BeltMode::Categorical(classes) => {
            if spec.family != EnsembleFamily::CategoricalIndicator || spec.m != classes {
                return Err(BennError::Config(format!(
                    "categorical({classes}) requires the class-indicator ensemble with m = {classes}"
                )));
            }
        }
        BeltMode::LinearCs | BeltMode::NonlinearCs => {}
    }
    Ok(())
}

/// Reads off the estimated basis of the linear reduction subspace.
///
/// For linear modes the reducer is the single affine map `x -> W x + b`;
/// the returned `p x d` matrix is `W^T`, whose column span is the
/// estimated reduction subspace (the bias shifts the predictor but not
/// the span).
pub fn extract_linear_basis(model: &BennModel) -> Result<Array2<f64>> {
    if !model.mode.is_linear() {
        return Err(BennError::Mode(format!(
            "linear basis extraction requires a linear belt mode, model is {}",
            model.mode
        )));
    }
    Ok(model.reducer.layers[0].weights.t().to_owned())
}
