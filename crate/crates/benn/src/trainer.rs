//! Training: squared-error objective on the transformed responses,
//! reverse-mode gradients for both sub-networks, and mini-batch
//! optimization.
//!
//! The objective is `tau/(n*m) * sum_{i,j} (G[i,j] - clamp(yhat[i,j]))^2`
//! where `G` is the transformed-response matrix and the clamp (when a
//! truncation bound is configured) contributes zero gradient wherever it
//! is active. Training is bit-reproducible for a fixed seed and worker
//! count.

use crate::belt::{build_benn, validate_mode_ensemble};
use crate::ensemble::{ensemble_matrix, EnsembleMatrix, EnsembleSpec};
use crate::error::{BennError, Result};
use crate::network::{
    clip_model_weights, forward_batch, truncate_matrix_inplace, BeltMode, BennModel, DenseNet,
    StructuralParams,
};
use crate::rng;
use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// Gradient of one dense network, laid out like its layers.
#[derive(Debug, Clone)]
pub struct NetGradients {
    /// Per layer: (weight gradient, bias gradient).
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl NetGradients {
    fn zeros_like(net: &DenseNet) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| {
                    (
                        Array2::zeros(l.weights.raw_dim()),
                        Array1::zeros(l.bias.raw_dim()),
                    )
                })
                .collect(),
        }
    }

    fn add_assign(&mut self, other: &Self) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }
}

/// Gradient of a full belted model.
#[derive(Debug, Clone)]
pub struct BennGradients {
    pub reducer: NetGradients,
    pub regressor: NetGradients,
}

impl BennGradients {
    fn add_assign(&mut self, other: &Self) {
        self.reducer.add_assign(&other.reducer);
        self.regressor.add_assign(&other.regressor);
    }

    /// Flattened in the same order as [`BennModel::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for grads in [&self.reducer, &self.regressor] {
            for (w, b) in &grads.layers {
                out.extend(w.iter().copied());
                out.extend(b.iter().copied());
            }
        }
        out
    }
}

/// Optimizer choice.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Training configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Clamp bound applied to predictions inside the loss; `None` trains
    /// on the raw outputs.
    pub truncation: Option<f64>,
    /// Magnitude bound re-imposed on all weights and biases after every
    /// optimizer step.
    pub weight_clip: Option<f64>,
    pub shuffle: bool,
    /// Number of partitions for data-parallel gradient evaluation.
    /// Results are deterministic for a fixed worker count; worker count 1
    /// is the bit-exact reference path.
    pub workers: usize,
}

impl TrainConfig {
    /// Adam with learning rate 1e-2 and batches of at most 128 rows.
    pub fn default_for(n: usize, seed: u64) -> Self {
        Self {
            epochs: 150,
            batch_size: n.clamp(1, 128),
            learning_rate: 1e-2,
            optimizer: Optimizer::adam(),
            seed,
            truncation: None,
            weight_clip: None,
            shuffle: true,
            workers: 1,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(BennError::Param("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(BennError::Param("batch size must be >= 1".into()));
        }
        if self.batch_size > n {
            return Err(BennError::Param(format!(
                "batch size {} exceeds sample size {}",
                self.batch_size, n
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(BennError::Param("learning rate must be positive".into()));
        }
        if let Some(b) = self.truncation {
            if !(b > 0.0) {
                return Err(BennError::Param("truncation bound must be positive".into()));
            }
        }
        if let Some(b) = self.weight_clip {
            if !(b > 0.0) {
                return Err(BennError::Param("weight clip bound must be positive".into()));
            }
        }
        if self.workers == 0 {
            return Err(BennError::Param("worker count must be >= 1".into()));
        }
        Ok(())
    }
}

/// A trained model with its loss history and the exact configuration and
/// ensemble used, so predictions can be reproduced.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: BennModel,
    /// Mean training loss on the full training set after each epoch.
    pub loss_trace: Vec<f64>,
    pub config: TrainConfig,
    pub ensemble: EnsembleSpec,
}

/// Rescaled squared error `tau/(n*m) * sum (G - clamp(yhat))^2` over all
/// rows of `x`.
pub fn empirical_loss(
    model: &BennModel,
    x: &Array2<f64>,
    g: &EnsembleMatrix,
    truncation: Option<f64>,
) -> Result<f64> {
    let (n, m) = (g.values.nrows(), g.values.ncols());
    if x.nrows() != n {
        return Err(BennError::Shape(format!(
            "predictor rows {} do not match target rows {n}",
            x.nrows()
        )));
    }
    let z = forward_batch(&model.reducer, x)?;
    let mut yhat = forward_batch(&model.regressor, &z)?;
    if yhat.ncols() != m {
        return Err(BennError::Shape(format!(
            "model outputs {} columns but targets have {m}",
            yhat.ncols()
        )));
    }
    if let Some(b) = truncation {
        truncate_matrix_inplace(&mut yhat, b)?;
    }
    let mut sum = 0.0;
    for (p, t) in yhat.iter().zip(g.values.iter()) {
        let r = p - t;
        sum += r * r;
    }
    Ok(g.tau / (n * m) as f64 * sum)
}

/// Forward pass keeping per-layer activations for the backward pass.
/// `acts[0]` is the input; `acts[l]` is the output of layer l with ReLU
/// already applied on hidden layers.
fn forward_trace(net: &DenseNet, x: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
    if x.ncols() != net.in_dim() {
        return Err(BennError::Shape(format!(
            "input width {} does not match network input dimension {}",
            x.ncols(),
            net.in_dim()
        )));
    }
    let mut acts = Vec::with_capacity(net.layers.len() + 1);
    acts.push(x.clone());
    let last = net.layers.len() - 1;
    for (i, layer) in net.layers.iter().enumerate() {
        let mut z = acts[i].dot(&layer.weights.t());
        z += &layer.bias;
        if i < last && net.activation == crate::network::Activation::ReluOnHidden {
            z.mapv_inplace(|v| v.max(0.0));
        }
        acts.push(z);
    }
    Ok(acts)
}

/// Backward pass through one network. `delta` is the loss gradient with
/// respect to the network output; returns the parameter gradients and the
/// loss gradient with respect to the network input.
///
/// ReLU uses subgradient 0 at the kink; since hidden activations are
/// post-ReLU, `act > 0` identifies exactly the units with positive
/// pre-activation.
fn backward(net: &DenseNet, acts: &[Array2<f64>], delta: Array2<f64>) -> (NetGradients, Array2<f64>) {
    let mut grads = NetGradients::zeros_like(net);
    let mut delta = delta;
    for l in (0..net.layers.len()).rev() {
        let input = &acts[l];
        grads.layers[l].0 = delta.t().dot(input);
        grads.layers[l].1 = delta.sum_axis(Axis(0));
        let mut upstream = delta.dot(&net.layers[l].weights);
        if l > 0 && net.activation == crate::network::Activation::ReluOnHidden {
            upstream.zip_mut_with(&acts[l], |u, &a| {
                if a <= 0.0 {
                    *u = 0.0;
                }
            });
        }
        delta = upstream;
    }
    (grads, delta)
}

/// Core gradient computation with the output-delta coefficient supplied
/// by the caller (`2 * tau / (n * m)` for the batch objective).
fn gradient_core(
    model: &BennModel,
    x: &Array2<f64>,
    g: &Array2<f64>,
    truncation: Option<f64>,
    coeff: f64,
) -> Result<BennGradients> {
    let acts_f = forward_trace(&model.reducer, x)?;
    let acts_h = forward_trace(&model.regressor, acts_f.last().expect("nonempty trace"))?;
    let yhat = acts_h.last().expect("nonempty trace");
    if yhat.raw_dim() != g.raw_dim() {
        return Err(BennError::Shape(format!(
            "prediction shape {:?} does not match target shape {:?}",
            yhat.shape(),
            g.shape()
        )));
    }

    // d loss / d yhat, with zero gradient where the clamp is active
    // (subgradient 0 at the clamp kink as well).
    let mut delta = Array2::zeros(yhat.raw_dim());
    match truncation {
        Some(b) => {
            for ((d, &p), &t) in delta.iter_mut().zip(yhat.iter()).zip(g.iter()) {
                if p.abs() < b {
                    *d = coeff * (p - t);
                }
            }
        }
        None => {
            for ((d, &p), &t) in delta.iter_mut().zip(yhat.iter()).zip(g.iter()) {
                *d = coeff * (p - t);
            }
        }
    }

    let (grads_h, delta_z) = backward(&model.regressor, &acts_h, delta);
    let (grads_f, _) = backward(&model.reducer, &acts_f, delta_z);
    Ok(BennGradients {
        reducer: grads_f,
        regressor: grads_h,
    })
}

/// Gradient of [`empirical_loss`] restricted to the given batch, with
/// respect to every weight and bias of both sub-networks.
pub fn gradient(
    model: &BennModel,
    batch_x: &Array2<f64>,
    batch_g: &EnsembleMatrix,
    truncation: Option<f64>,
) -> Result<BennGradients> {
    let (n, m) = (batch_g.values.nrows(), batch_g.values.ncols());
    if n == 0 {
        return Err(BennError::Param("gradient batch must be nonempty".into()));
    }
    let coeff = 2.0 * batch_g.tau / (n * m) as f64;
    gradient_core(model, batch_x, &batch_g.values, truncation, coeff)
}

/// Data-parallel variant of [`gradient`]: the batch is split into
/// `workers` contiguous partitions whose partial gradients are computed
/// on immutable model snapshots and reduced in partition order, so the
/// result is deterministic for a fixed worker count.
pub fn gradient_partitioned(
    model: &BennModel,
    batch_x: &Array2<f64>,
    batch_g: &EnsembleMatrix,
    truncation: Option<f64>,
    workers: usize,
) -> Result<BennGradients> {
    let (n, m) = (batch_g.values.nrows(), batch_g.values.ncols());
    if n == 0 {
        return Err(BennError::Param("gradient batch must be nonempty".into()));
    }
    if workers <= 1 || n == 1 {
        return gradient(model, batch_x, batch_g, truncation);
    }
    let coeff = 2.0 * batch_g.tau / (n * m) as f64;
    let chunk = n.div_ceil(workers.min(n));
    let bounds: Vec<(usize, usize)> = (0..n)
        .step_by(chunk)
        .map(|start| (start, (start + chunk).min(n)))
        .collect();
    let partials: Vec<Result<BennGradients>> = bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let xs = batch_x.slice(ndarray::s![lo..hi, ..]).to_owned();
            let gs = batch_g.values.slice(ndarray::s![lo..hi, ..]).to_owned();
            gradient_core(model, &xs, &gs, truncation, coeff)
        })
        .collect();
    let mut iter = partials.into_iter();
    let mut total = iter.next().expect("at least one partition")?;
    for partial in iter {
        total.add_assign(&partial?);
    }
    Ok(total)
}

/// Per-tensor first/second moment estimates for Adam.
struct AdamState {
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
    step: u64,
}

impl AdamState {
    fn new(model: &BennModel) -> Self {
        let zeros: Vec<(Array2<f64>, Array1<f64>)> = model
            .reducer
            .layers
            .iter()
            .chain(model.regressor.layers.iter())
            .map(|l| {
                (
                    Array2::zeros(l.weights.raw_dim()),
                    Array1::zeros(l.bias.raw_dim()),
                )
            })
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }
}

fn apply_update(model: &mut BennModel, grads: &BennGradients, cfg: &TrainConfig, adam: &mut Option<AdamState>) {
    let lr = cfg.learning_rate;
    let layer_grads = grads
        .reducer
        .layers
        .iter()
        .chain(grads.regressor.layers.iter());
    let n_reducer = model.reducer.layers.len();
    match (cfg.optimizer, adam) {
        (Optimizer::Sgd, _) => {
            for (idx, (gw, gb)) in layer_grads.enumerate() {
                let layer = if idx < n_reducer {
                    &mut model.reducer.layers[idx]
                } else {
                    &mut model.regressor.layers[idx - n_reducer]
                };
                layer.weights.scaled_add(-lr, gw);
                layer.bias.scaled_add(-lr, gb);
            }
        }
        (Optimizer::Adam { beta1, beta2, epsilon }, Some(state)) => {
            state.step += 1;
            let bc1 = 1.0 - beta1.powi(state.step as i32);
            let bc2 = 1.0 - beta2.powi(state.step as i32);
            for (idx, (gw, gb)) in layer_grads.enumerate() {
                let layer = if idx < n_reducer {
                    &mut model.reducer.layers[idx]
                } else {
                    &mut model.regressor.layers[idx - n_reducer]
                };
                let (mw, mb) = &mut state.m[idx];
                let (vw, vb) = &mut state.v[idx];

                mw.zip_mut_with(gw, |m, &g| *m = beta1 * *m + (1.0 - beta1) * g);
                vw.zip_mut_with(gw, |v, &g| *v = beta2 * *v + (1.0 - beta2) * g * g);
                ndarray::Zip::from(&mut layer.weights)
                    .and(&*mw)
                    .and(&*vw)
                    .for_each(|w, &m, &v| {
                        *w -= lr * (m / bc1) / ((v / bc2).sqrt() + epsilon);
                    });

                mb.zip_mut_with(gb, |m, &g| *m = beta1 * *m + (1.0 - beta1) * g);
                vb.zip_mut_with(gb, |v, &g| *v = beta2 * *v + (1.0 - beta2) * g * g);
                ndarray::Zip::from(&mut layer.bias)
                    .and(&*mb)
                    .and(&*vb)
                    .for_each(|w, &m, &v| {
                        *w -= lr * (m / bc1) / ((v / bc2).sqrt() + epsilon);
                    });
            }
        }
        (Optimizer::Adam { .. }, None) => unreachable!("adam state initialized with the model"),
    }
}

/// Trains a belted model on `(x, y)` and returns the fitted model with
/// its per-epoch loss trace. Deterministic given the configuration seed.
pub fn fit(
    x: &Array2<f64>,
    y: &Array1<f64>,
    mode: BeltMode,
    params: &StructuralParams,
    spec: &EnsembleSpec,
    cfg: &TrainConfig,
) -> Result<FitResult> {
    fit_with_progress(x, y, mode, params, spec, cfg, |_, _| {})
}

/// [`fit`] with a per-epoch callback `(epoch, mean training loss)`.
pub fn fit_with_progress(
    x: &Array2<f64>,
    y: &Array1<f64>,
    mode: BeltMode,
    params: &StructuralParams,
    spec: &EnsembleSpec,
    cfg: &TrainConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<FitResult> {
    let n = x.nrows();
    if y.len() != n {
        return Err(BennError::Shape(format!(
            "predictor rows {n} do not match response length {}",
            y.len()
        )));
    }
    if x.ncols() != params.p {
        return Err(BennError::Shape(format!(
            "data has {} predictors but the architecture expects p = {}",
            x.ncols(),
            params.p
        )));
    }
    if spec.m != params.m {
        return Err(BennError::Config(format!(
            "ensemble size {} does not match architecture output m = {}",
            spec.m, params.m
        )));
    }
    cfg.validate(n)?;
    validate_mode_ensemble(mode, spec)?;

    let g = ensemble_matrix(spec, y)?;
    let mut model = build_benn(mode, params, rng::derive_seed(cfg.seed, 0))?;
    if let Some(b) = cfg.weight_clip {
        clip_model_weights(&mut model, b)?;
    }
    let mut adam = match cfg.optimizer {
        Optimizer::Adam { .. } => Some(AdamState::new(&model)),
        Optimizer::Sgd => None,
    };

    let mut shuffle_rng = rng::stream(rng::derive_seed(cfg.seed, 1));
    let mut indices: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            indices.shuffle(&mut shuffle_rng);
        }
        for batch_idx in indices.chunks(cfg.batch_size) {
            let batch_x = x.select(Axis(0), batch_idx);
            let batch_g = EnsembleMatrix {
                values: g.values.select(Axis(0), batch_idx),
                tau: g.tau,
            };
            let grads = if cfg.workers > 1 {
                gradient_partitioned(&model, &batch_x, &batch_g, cfg.truncation, cfg.workers)?
            } else {
                gradient(&model, &batch_x, &batch_g, cfg.truncation)?
            };
            apply_update(&mut model, &grads, cfg, &mut adam);
            if let Some(b) = cfg.weight_clip {
                clip_model_weights(&mut model, b)?;
            }
        }
        let loss = empirical_loss(&model, x, &g, cfg.truncation)?;
        if !loss.is_finite() {
            return Err(BennError::Divergence { epoch });
        }
        progress(epoch, loss);
        loss_trace.push(loss);
    }

    Ok(FitResult {
        model,
        loss_trace,
        config: cfg.clone(),
        ensemble: spec.clone(),
    })
}

/// Sufficient predictors for new data: row i is the reducer output for
/// row i of `x_new`.
pub fn predict_sufficient(result: &FitResult, x_new: &Array2<f64>) -> Result<Array2<f64>> {
    forward_batch(&result.model.reducer, x_new)
}

/// Ensemble predictions for new data, clamped to the truncation bound
/// when one was configured for training.
pub fn predict_ensemble(result: &FitResult, x_new: &Array2<f64>) -> Result<Array2<f64>> {
    let z = forward_batch(&result.model.reducer, x_new)?;
    let mut out = forward_batch(&result.model.regressor, &z)?;
    if let Some(b) = result.config.truncation {
        truncate_matrix_inplace(&mut out, b)?;
    }
    Ok(out)
}

/// Evaluates the fitted transform surface at an off-grid point `t` by the
/// piecewise-constant rule: the prediction is the height of the column
/// whose grid cell `[t_j, t_{j+1})` contains `t`, with the final cell
/// closing at `t_grid[0] + tau`. Requires a strictly increasing grid.
pub fn predict_ensemble_at(result: &FitResult, x_new: &Array2<f64>, t: f64) -> Result<Array1<f64>> {
    let grid = &result.ensemble.t_grid;
    if grid.len() != result.ensemble.m || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BennError::Param(
            "off-grid evaluation requires a strictly increasing evaluation grid".into(),
        ));
    }
    let upper = grid[0] + result.ensemble.tau;
    if t < grid[0] || t >= upper {
        return Err(BennError::Param(format!(
            "t = {t} is outside the grid range [{}, {upper})",
            grid[0]
        )));
    }
    let j = match grid.binary_search_by(|g| g.partial_cmp(&t).unwrap()) {
        Ok(exact) => exact,
        Err(insert) => insert - 1,
    };
    let heights = predict_ensemble(result, x_new)?;
    Ok(heights.column(j).to_owned())
}
