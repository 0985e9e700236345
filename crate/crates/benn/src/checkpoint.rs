//! Model persistence.
//!
//! Checkpoints are self-describing JSON documents (version tag
//! `benn-v1`) holding the structural parameters, belt mode, per-layer
//! shapes with row-major weight and bias arrays, the exact ensemble used
//! in training, and the truncation bound. Floats are written with
//! shortest round-trip formatting, so save/load preserves every
//! parameter bit-exactly.

use crate::ensemble::EnsembleSpec;
use crate::error::{BennError, Result};
use crate::network::{Activation, BeltMode, BennModel, DenseNet, Layer, StructuralParams};
use crate::trainer::{FitResult, TrainConfig};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_VERSION: &str = "benn-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LayerRecord {
    rows: usize,
    cols: usize,
    /// Row-major weight matrix.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetRecord {
    activation: Activation,
    layers: Vec<LayerRecord>,
}

/// On-disk model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub params: StructuralParams,
    pub mode: BeltMode,
    reducer: NetRecord,
    regressor: NetRecord,
    pub ensemble: EnsembleSpec,
    /// Truncation bound the model was trained with, if any; prediction
    /// applies the same clamp.
    pub truncation: Option<f64>,
}

fn net_to_record(net: &DenseNet) -> NetRecord {
    NetRecord {
        activation: net.activation,
        layers: net
            .layers
            .iter()
            .map(|l| LayerRecord {
                rows: l.weights.nrows(),
                cols: l.weights.ncols(),
                weights: l.weights.iter().copied().collect(),
                bias: l.bias.to_vec(),
            })
            .collect(),
    }
}

fn net_from_record(rec: &NetRecord) -> Result<DenseNet> {
    let mut layers = Vec::with_capacity(rec.layers.len());
    let mut prev_out: Option<usize> = None;
    for (i, l) in rec.layers.iter().enumerate() {
        if l.weights.len() != l.rows * l.cols {
            return Err(BennError::Shape(format!(
                "layer {i}: {}x{} declared but {} weights stored",
                l.rows,
                l.cols,
                l.weights.len()
            )));
        }
        if l.bias.len() != l.rows {
            return Err(BennError::Shape(format!(
                "layer {i}: bias length {} does not match {} rows",
                l.bias.len(),
                l.rows
            )));
        }
        if let Some(prev) = prev_out {
            if l.cols != prev {
                return Err(BennError::Shape(format!(
                    "layer {i}: expects {} inputs but previous layer outputs {prev}",
                    l.cols
                )));
            }
        }
        prev_out = Some(l.rows);
        layers.push(Layer {
            weights: Array2::from_shape_vec((l.rows, l.cols), l.weights.clone())
                .map_err(|e| BennError::Shape(e.to_string()))?,
            bias: Array1::from_vec(l.bias.clone()),
        });
    }
    if layers.is_empty() {
        return Err(BennError::Shape("network has no layers".into()));
    }
    Ok(DenseNet {
        layers,
        activation: rec.activation,
    })
}

impl Checkpoint {
    pub fn from_fit(fit: &FitResult) -> Self {
        Self::from_parts(&fit.model, &fit.ensemble, fit.config.truncation)
    }

    pub fn from_parts(model: &BennModel, ensemble: &EnsembleSpec, truncation: Option<f64>) -> Self {
        Self {
            version: CHECKPOINT_VERSION.into(),
            params: model.params.clone(),
            mode: model.mode,
            reducer: net_to_record(&model.reducer),
            regressor: net_to_record(&model.regressor),
            ensemble: ensemble.clone(),
            truncation,
        }
    }

    /// Reconstructs the model, validating layer chaining and the declared
    /// structural parameters.
    pub fn to_model(&self) -> Result<BennModel> {
        if self.version != CHECKPOINT_VERSION {
            return Err(BennError::Config(format!(
                "unsupported checkpoint version {:?}; this build reads {CHECKPOINT_VERSION}",
                self.version
            )));
        }
        let reducer = net_from_record(&self.reducer)?;
        let regressor = net_from_record(&self.regressor)?;
        if reducer.in_dim() != self.params.p
            || reducer.out_dim() != self.params.d
            || regressor.in_dim() != self.params.d
            || regressor.out_dim() != self.params.m
        {
            return Err(BennError::Shape(
                "stored network shapes disagree with the structural parameters".into(),
            ));
        }
        Ok(BennModel {
            reducer,
            regressor,
            mode: self.mode,
            params: self.params.clone(),
        })
    }

    /// Rebuilds a prediction-ready handle; the training hyperparameters
    /// other than truncation are not stored and are echoed as defaults.
    pub fn to_fit_result(&self) -> Result<FitResult> {
        let model = self.to_model()?;
        let mut config = TrainConfig::default_for(1, 0);
        config.truncation = self.truncation;
        Ok(FitResult {
            model,
            loss_trace: Vec::new(),
            config,
            ensemble: self.ensemble.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belt::build_benn;
    use crate::ensemble::build_gauss_ensemble;
    use ndarray::array;

    fn sample_fit() -> FitResult {
        let ds = crate::datagen::gen_model_d(40, 5, 3).unwrap();
        let params = StructuralParams::constant_width(5, 1, 6, 2, 1, 8, 4).unwrap();
        let spec = build_gauss_ensemble(&ds.y, 4, 9).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 10,
            truncation: Some(1.0),
            ..TrainConfig::default_for(40, 5)
        };
        crate::trainer::fit(&ds.x, &ds.y, BeltMode::NonlinearCs, &params, &spec, &cfg).unwrap()
    }

    #[test]
    fn round_trip_preserves_every_parameter_exactly() {
        let fit = sample_fit();
        let ck = Checkpoint::from_fit(&fit);
        let json = ck.to_json().unwrap();
        let back = Checkpoint::from_json(&json).unwrap();
        let model = back.to_model().unwrap();
        assert_eq!(model.params_flat(), fit.model.params_flat());
        assert_eq!(model.mode, fit.model.mode);
        assert_eq!(back.ensemble, fit.ensemble);
        assert_eq!(back.truncation, Some(1.0));

        // serializing again yields the identical document
        let json2 = Checkpoint::from_json(&json).unwrap().to_json().unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn file_round_trip_and_prediction_agreement() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let fit = sample_fit();
        Checkpoint::from_fit(&fit).save(&path).unwrap();
        let restored = Checkpoint::load(&path).unwrap().to_fit_result().unwrap();

        let ds = crate::datagen::gen_model_d(7, 5, 11).unwrap();
        let a = crate::trainer::predict_ensemble(&fit, &ds.x).unwrap();
        let b = crate::trainer::predict_ensemble(&restored, &ds.x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn version_and_shape_validation() {
        let fit = sample_fit();
        let mut ck = Checkpoint::from_fit(&fit);
        ck.version = "benn-v0".into();
        assert!(matches!(ck.to_model(), Err(BennError::Config(_))));

        let mut bad = Checkpoint::from_fit(&fit);
        bad.params.p = 7;
        assert!(matches!(bad.to_model(), Err(BennError::Shape(_))));
    }

    #[test]
    fn mode_tag_is_a_string_with_parameters() {
        let params = StructuralParams::constant_width(4, 1, 5, 2, 1, 3, 3).unwrap();
        let model = build_benn(BeltMode::KthMoment(3), &params, 1).unwrap();
        let spec = crate::ensemble::EnsembleSpec::moments(3).unwrap();
        let ck = Checkpoint::from_parts(&model, &spec, None);
        let json = ck.to_json().unwrap();
        assert!(json.contains("\"kth-moment\""), "{json}");
        let back = Checkpoint::from_json(&json).unwrap();
        assert_eq!(back.mode, BeltMode::KthMoment(3));

        // extreme values survive the trip exactly
        let mut model2 = model.clone();
        model2.reducer.layers[0].weights[[0, 0]] = f64::MIN_POSITIVE;
        model2.reducer.layers[0].weights[[0, 1]] = 1.0 / 3.0;
        model2.reducer.layers[0].bias = array![1e300, -2.2250738585072014e-308, 0.1, 0.2, 0.3]
            .slice(ndarray::s![..model2.reducer.layers[0].bias.len()])
            .to_owned();
        let ck2 = Checkpoint::from_parts(&model2, &spec, None);
        let m2 = Checkpoint::from_json(&ck2.to_json().unwrap())
            .unwrap()
            .to_model()
            .unwrap();
        assert_eq!(m2.params_flat(), model2.params_flat());
    }
}
