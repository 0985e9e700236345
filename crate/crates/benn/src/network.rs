//! Dense feed-forward networks and the two-stage belted model.
//!
//! A [`DenseNet`] is an ordered list of affine layers with ReLU applied
//! after every layer except the last. A [`BennModel`] composes two of
//! them: a dimension reducer mapping the predictors to the narrow belt of
//! width `d`, followed by an ensemble regressor mapping the belt to the
//! `m` transformed-response targets.

use crate::error::{BennError, Result};
use crate::rng;
use ndarray::{Array1, Array2};

/// Structural parameters of a belted model: input dimension `p`, the
/// reducer's hidden widths `k1` (depth `l1`), belt width `d`, the
/// regressor's hidden widths `k2` (depth `l2`), output dimension `m`,
/// and an optional magnitude bound on all weights and biases.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StructuralParams {
    pub p: usize,
    pub l1: usize,
    pub k1: Vec<usize>,
    pub d: usize,
    pub l2: usize,
    pub k2: Vec<usize>,
    pub m: usize,
    /// Magnitude bound applied to every weight and bias; `None` leaves the
    /// parameters unbounded.
    pub b_w: Option<f64>,
}

impl StructuralParams {
    /// Builds parameters from explicit per-layer width vectors.
    pub fn new(p: usize, k1: Vec<usize>, d: usize, k2: Vec<usize>, m: usize) -> Result<Self> {
        let params = Self {
            p,
            l1: k1.len(),
            k1,
            d,
            l2: k2.len(),
            k2,
            m,
            b_w: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// Constant-width shorthand: `l1` hidden layers of width `r1` in the
    /// reducer and `l2` of width `r2` in the regressor.
    pub fn constant_width(
        p: usize,
        l1: usize,
        r1: usize,
        d: usize,
        l2: usize,
        r2: usize,
        m: usize,
    ) -> Result<Self> {
        Self::new(p, vec![r1; l1], d, vec![r2; l2], m)
    }

    pub fn with_weight_bound(mut self, b_w: f64) -> Result<Self> {
        if !(b_w > 0.0) {
            return Err(BennError::Param(format!(
                "weight bound must be positive, got {b_w}"
            )));
        }
        self.b_w = Some(b_w);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.d == 0 || self.m == 0 {
            return Err(BennError::Param(
                "dimensions p, d, m must all be positive".into(),
            ));
        }
        if self.d >= self.p {
            return Err(BennError::Param(format!(
                "belt width d = {} must be smaller than input dimension p = {}",
                self.d, self.p
            )));
        }
        if self.k1.len() != self.l1 || self.k2.len() != self.l2 {
            return Err(BennError::Param(
                "width vector length must equal declared depth".into(),
            ));
        }
        if self.k1.iter().chain(self.k2.iter()).any(|&w| w == 0) {
            return Err(BennError::Param("all hidden widths must be >= 1".into()));
        }
        if let Some(b) = self.b_w {
            if !(b > 0.0) {
                return Err(BennError::Param(format!(
                    "weight bound must be positive, got {b}"
                )));
            }
        }
        Ok(())
    }
}

/// Activation policy of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    /// ReLU after every layer except the last affine map.
    ReluOnHidden,
    /// No activation anywhere; the network is a chain of affine maps.
    None,
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitScheme {
    /// Weights and biases uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    UniformFanIn,
    /// Weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
    #[default]
    ZeroBiasUniformWeight,
}

/// One affine layer: `z = W x + b` with `W` of shape `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// Dense feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
    pub activation: Activation,
}

impl DenseNet {
    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, Layer::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Flattens all parameters (layer by layer, row-major weights then
    /// bias) into one vector.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend(layer.weights.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    /// Writes back a flat parameter vector produced by [`params_flat`].
    ///
    /// [`params_flat`]: DenseNet::params_flat
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(BennError::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut() {
                *w = flat[offset];
                offset += 1;
            }
            for b in layer.bias.iter_mut() {
                *b = flat[offset];
                offset += 1;
            }
        }
        Ok(())
    }
}

/// Creates a seeded dense network with hidden widths `widths` mapping
/// `in_dim` to `out_dim`. Identical `(in_dim, widths, out_dim, seed,
/// scheme)` inputs produce bit-identical networks.
pub fn init_network(
    in_dim: usize,
    widths: &[usize],
    out_dim: usize,
    seed: u64,
    scheme: InitScheme,
) -> Result<DenseNet> {
    if in_dim == 0 || out_dim == 0 {
        return Err(BennError::Shape(
            "input and output dimensions must be positive".into(),
        ));
    }
    if widths.contains(&0) {
        return Err(BennError::Shape("hidden widths must be positive".into()));
    }
    let mut dims = Vec::with_capacity(widths.len() + 2);
    dims.push(in_dim);
    dims.extend_from_slice(widths);
    dims.push(out_dim);

    let mut rng = rng::stream(seed);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for pair in dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
            rng::uniform(&mut rng, -bound, bound)
        });
        let bias = match scheme {
            InitScheme::UniformFanIn => {
                Array1::from_shape_fn(fan_out, |_| rng::uniform(&mut rng, -bound, bound))
            }
            InitScheme::ZeroBiasUniformWeight => Array1::zeros(fan_out),
        };
        layers.push(Layer { weights, bias });
    }
    Ok(DenseNet {
        layers,
        activation: Activation::ReluOnHidden,
    })
}

/// Evaluates the network on a single input vector.
pub fn forward(net: &DenseNet, x: &Array1<f64>) -> Result<Array1<f64>> {
    if x.len() != net.in_dim() {
        return Err(BennError::Shape(format!(
            "input length {} does not match network input dimension {}",
            x.len(),
            net.in_dim()
        )));
    }
    let mut a = x.clone();
    let last = net.layers.len() - 1;
    for (i, layer) in net.layers.iter().enumerate() {
        let mut z = layer.weights.dot(&a) + &layer.bias;
        if i < last && net.activation == Activation::ReluOnHidden {
            z.mapv_inplace(|v| v.max(0.0));
        }
        a = z;
    }
    Ok(a)
}

/// Evaluates the network on a batch laid out as rows of `x` (n x in_dim).
pub fn forward_batch(net: &DenseNet, x: &Array2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != net.in_dim() {
        return Err(BennError::Shape(format!(
            "input width {} does not match network input dimension {}",
            x.ncols(),
            net.in_dim()
        )));
    }
    let mut a = x.clone();
    let last = net.layers.len() - 1;
    for (i, layer) in net.layers.iter().enumerate() {
        let mut z = a.dot(&layer.weights.t());
        z += &layer.bias;
        if i < last && net.activation == Activation::ReluOnHidden {
            z.mapv_inplace(|v| v.max(0.0));
        }
        a = z;
    }
    Ok(a)
}

/// Belt placement policy. Construction rules live in the `belt` module;
/// the tag is carried on the model so extraction and serialization know
/// which guarantees hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "tag", content = "value", rename_all = "kebab-case")]
pub enum BeltMode {
    /// Nonlinear reduction targeting the conditional distribution.
    NonlinearCs,
    /// Linear reduction targeting the conditional distribution; the
    /// reducer is a single affine map.
    LinearCs,
    /// Linear reduction targeting the conditional mean (identity ensemble).
    LinearCms,
    /// Nonlinear reduction targeting the conditional mean.
    NonlinearCms,
    /// Reduction sufficient for the first k conditional moments.
    KthMoment(usize),
    /// Categorical response with the given number of classes.
    Categorical(usize),
}

impl BeltMode {
    pub fn is_linear(self) -> bool {
        matches!(self, BeltMode::LinearCs | BeltMode::LinearCms)
    }
}

impl std::fmt::Display for BeltMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BeltMode::NonlinearCs => write!(f, "nonlinear-cs"),
            BeltMode::LinearCs => write!(f, "linear-cs"),
            BeltMode::LinearCms => write!(f, "linear-cms"),
            BeltMode::NonlinearCms => write!(f, "nonlinear-cms"),
            BeltMode::KthMoment(k) => write!(f, "kth-moment({k})"),
            BeltMode::Categorical(k) => write!(f, "categorical({k})"),
        }
    }
}

/// Two-stage belted model: `reducer` maps p -> d, `regressor` maps d -> m.
#[derive(Debug, Clone, PartialEq)]
pub struct BennModel {
    pub reducer: DenseNet,
    pub regressor: DenseNet,
    pub mode: BeltMode,
    pub params: StructuralParams,
}

impl BennModel {
    pub fn param_count(&self) -> usize {
        self.reducer.param_count() + self.regressor.param_count()
    }

    /// Flat parameter vector: reducer parameters first, then regressor.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut v = self.reducer.params_flat();
        v.extend(self.regressor.params_flat());
        v
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        let nf = self.reducer.param_count();
        if flat.len() != nf + self.regressor.param_count() {
            return Err(BennError::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        self.reducer.set_params_flat(&flat[..nf])?;
        self.regressor.set_params_flat(&flat[nf..])
    }
}

/// Runs the two-stage forward pass, returning the sufficient predictor
/// `z` (length d) and the ensemble prediction (length m).
pub fn benn_forward(model: &BennModel, x: &Array1<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    let z = forward(&model.reducer, x)?;
    let y = forward(&model.regressor, &z)?;
    Ok((z, y))
}

/// Batch variant of [`benn_forward`]; rows of `x` are samples.
pub fn benn_forward_batch(
    model: &BennModel,
    x: &Array2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let z = forward_batch(&model.reducer, x)?;
    let y = forward_batch(&model.regressor, &z)?;
    Ok((z, y))
}

/// Clamps every component of `v` to [-b, b].
pub fn truncate(v: &Array1<f64>, b: f64) -> Result<Array1<f64>> {
    if !(b > 0.0) {
        return Err(BennError::Param(format!(
            "truncation bound must be positive, got {b}"
        )));
    }
    Ok(v.mapv(|x| x.clamp(-b, b)))
}

/// In-place clamp of a matrix to [-b, b], used on batched predictions.
pub fn truncate_matrix_inplace(v: &mut Array2<f64>, b: f64) -> Result<()> {
    if !(b > 0.0) {
        return Err(BennError::Param(format!(
            "truncation bound must be positive, got {b}"
        )));
    }
    v.mapv_inplace(|x| x.clamp(-b, b));
    Ok(())
}

/// Clamps every weight and bias of the network to [-b_w, b_w].
pub fn clip_weights(net: &mut DenseNet, b_w: f64) -> Result<()> {
    if !(b_w > 0.0) {
        return Err(BennError::Param(format!(
            "weight bound must be positive, got {b_w}"
        )));
    }
    for layer in &mut net.layers {
        layer.weights.mapv_inplace(|w| w.clamp(-b_w, b_w));
        layer.bias.mapv_inplace(|b| b.clamp(-b_w, b_w));
    }
    Ok(())
}

/// Clamps both sub-networks of a model.
pub fn clip_model_weights(model: &mut BennModel, b_w: f64) -> Result<()> {
    clip_weights(&mut model.reducer, b_w)?;
    clip_weights(&mut model.regressor, b_w)
}

/// Largest parameter magnitude across both sub-networks.
pub fn max_abs_param(model: &BennModel) -> f64 {
    model
        .params_flat()
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)] // oracles use straight-line index loops
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn affine_net(weights: Array2<f64>, bias: Array1<f64>) -> DenseNet {
        DenseNet {
            layers: vec![Layer { weights, bias }],
            activation: Activation::ReluOnHidden,
        }
    }

    #[test]
    fn init_shapes_single_affine() {
        let net = init_network(2, &[], 1, 7, InitScheme::UniformFanIn).unwrap();
        assert_eq!(net.layers.len(), 1);
        assert_eq!(net.layers[0].weights.shape(), &[1, 2]);
        assert_eq!(net.layers[0].bias.len(), 1);
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_network(2, &[3], 1, 7, InitScheme::ZeroBiasUniformWeight).unwrap();
        let b = init_network(2, &[3], 1, 7, InitScheme::ZeroBiasUniformWeight).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
        let c = init_network(2, &[3], 1, 8, InitScheme::ZeroBiasUniformWeight).unwrap();
        assert_ne!(a.params_flat(), c.params_flat());
    }

    #[test]
    fn init_respects_fan_in_bounds() {
        let net = init_network(4, &[5, 5], 2, 1, InitScheme::UniformFanIn).unwrap();
        let fan_ins = [4.0f64, 5.0, 5.0];
        for (layer, fan_in) in net.layers.iter().zip(fan_ins) {
            let bound = 1.0 / fan_in.sqrt();
            for &w in layer.weights.iter().chain(layer.bias.iter()) {
                assert!(w.abs() <= bound, "param {w} outside bound {bound}");
            }
        }
    }

    #[test]
    fn init_zero_bias_scheme_zeroes_biases() {
        let net = init_network(3, &[4], 2, 5, InitScheme::ZeroBiasUniformWeight).unwrap();
        for layer in &net.layers {
            assert!(layer.bias.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn init_rejects_zero_dims() {
        assert!(init_network(0, &[3], 1, 7, InitScheme::UniformFanIn).is_err());
        assert!(init_network(2, &[0], 1, 7, InitScheme::UniformFanIn).is_err());
        assert!(init_network(2, &[3], 0, 7, InitScheme::UniformFanIn).is_err());
    }

    #[test]
    fn forward_pure_affine() {
        let net = affine_net(array![[1.0, 1.0]], array![0.0]);
        let y = forward(&net, &array![1.0, 2.0]).unwrap();
        assert_eq!(y, array![3.0]);
    }

    #[test]
    fn forward_relu_kills_negative_hidden_units() {
        let net = DenseNet {
            layers: vec![
                Layer {
                    weights: array![[1.0, 0.0], [0.0, 1.0]],
                    bias: array![-1.0, 0.0],
                },
                Layer {
                    weights: array![[1.0, 1.0]],
                    bias: array![0.0],
                },
            ],
            activation: Activation::ReluOnHidden,
        };
        let y = forward(&net, &array![0.5, -2.0]).unwrap();
        assert_eq!(y, array![0.0]);
    }

    #[test]
    fn forward_matches_straight_line_oracle() {
        // Independent re-implementation with plain nested loops.
        fn oracle(net: &DenseNet, x: &[f64]) -> Vec<f64> {
            let mut a = x.to_vec();
            for (i, layer) in net.layers.iter().enumerate() {
                let mut z = vec![0.0; layer.out_dim()];
                for r in 0..layer.out_dim() {
                    let mut s = layer.bias[r];
                    for c in 0..layer.in_dim() {
                        s += layer.weights[[r, c]] * a[c];
                    }
                    z[r] = s;
                }
                if i + 1 < net.layers.len() {
                    for v in &mut z {
                        if *v < 0.0 {
                            *v = 0.0;
                        }
                    }
                }
                a = z;
            }
            a
        }

        let net = init_network(3, &[4], 2, 21, InitScheme::UniformFanIn).unwrap();
        let x = array![0.3, -1.2, 2.5];
        let got = forward(&net, &x).unwrap();
        let want = oracle(&net, x.as_slice().unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn forward_batch_matches_single() {
        let net = init_network(3, &[4, 4], 2, 33, InitScheme::UniformFanIn).unwrap();
        let x = Array2::from_shape_fn((5, 3), |(i, j)| (i as f64 - 2.0) * 0.7 + j as f64 * 0.3);
        let batch = forward_batch(&net, &x).unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            let single = forward(&net, &row.to_owned()).unwrap();
            for j in 0..2 {
                // the batched path accumulates in a different order, so
                // agreement is to rounding, not bit-exact
                let diff = (batch[[i, j]] - single[j]).abs();
                assert!(diff <= 1e-13 * single[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let net = affine_net(array![[1.0, 1.0]], array![0.0]);
        assert!(matches!(
            forward(&net, &array![1.0]),
            Err(BennError::Shape(_))
        ));
    }

    #[test]
    fn benn_forward_identity_chain() {
        let model = BennModel {
            reducer: affine_net(array![[1.0, 0.0]], array![0.0]),
            regressor: affine_net(array![[1.0]], array![0.0]),
            mode: BeltMode::NonlinearCs,
            params: StructuralParams::constant_width(2, 0, 1, 1, 0, 1, 1).unwrap(),
        };
        let (z, y) = benn_forward(&model, &array![3.0, 5.0]).unwrap();
        assert_eq!(z, array![3.0]);
        assert_eq!(y, array![3.0]);
    }

    #[test]
    fn benn_forward_is_composition() {
        let model = BennModel {
            reducer: init_network(4, &[5, 5], 2, 1, InitScheme::UniformFanIn).unwrap(),
            regressor: init_network(2, &[6, 6], 5, 2, InitScheme::UniformFanIn).unwrap(),
            mode: BeltMode::NonlinearCs,
            params: StructuralParams::constant_width(4, 2, 5, 2, 2, 6, 5).unwrap(),
        };
        let x = array![0.1, -0.4, 0.2, 0.9];
        let (z, y) = benn_forward(&model, &x).unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!(y.len(), 5);
        let via_parts = forward(&model.regressor, &forward(&model.reducer, &x).unwrap()).unwrap();
        assert_eq!(y, via_parts);
    }

    #[test]
    fn zero_network_maps_everything_to_zero() {
        let mut net = init_network(3, &[4], 2, 3, InitScheme::UniformFanIn).unwrap();
        let zeros = vec![0.0; net.param_count()];
        net.set_params_flat(&zeros).unwrap();
        let y = forward(&net, &array![1.5, -2.0, 7.0]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn relu_inactive_on_nonnegative_preactivations() {
        let layers = vec![
            Layer {
                weights: array![[1.0, 0.0], [0.0, 1.0]],
                bias: array![1.0, 1.0],
            },
            Layer {
                weights: array![[1.0, 2.0]],
                bias: array![0.5],
            },
        ];
        let relu = DenseNet {
            layers: layers.clone(),
            activation: Activation::ReluOnHidden,
        };
        let none = DenseNet {
            layers,
            activation: Activation::None,
        };
        // Inputs keeping hidden pre-activations non-negative.
        let x = array![0.3, 0.7];
        assert_eq!(forward(&relu, &x).unwrap(), forward(&none, &x).unwrap());
    }

    #[test]
    fn truncate_clamps_and_validates() {
        let v = array![3.5, -5.0, 1.0];
        assert_eq!(truncate(&v, 2.0).unwrap(), array![2.0, -2.0, 1.0]);
        assert_eq!(truncate(&v, 1e12).unwrap(), v);
        assert!(truncate(&v, 0.0).is_err());
        assert!(truncate(&v, -1.0).is_err());
    }

    #[test]
    fn clip_weights_clamps_into_bound() {
        let mut net = affine_net(array![[5.0, -0.3]], array![0.2]);
        clip_weights(&mut net, 1.0).unwrap();
        assert_eq!(net.layers[0].weights, array![[1.0, -0.3]]);

        let mut inside = affine_net(array![[0.5, -0.3]], array![0.2]);
        let before = inside.params_flat();
        clip_weights(&mut inside, 1.0).unwrap();
        assert_eq!(inside.params_flat(), before);
    }

    #[test]
    fn structural_params_validation() {
        assert!(StructuralParams::constant_width(4, 2, 5, 2, 2, 6, 5).is_ok());
        // belt at least as wide as the input
        assert!(StructuralParams::constant_width(4, 2, 5, 4, 2, 6, 5).is_err());
        assert!(StructuralParams::constant_width(4, 2, 0, 2, 2, 6, 5).is_err());
        assert!(StructuralParams::constant_width(4, 2, 5, 2, 2, 6, 0).is_err());
    }

    proptest! {
        #[test]
        fn truncate_is_idempotent_and_contractive(
            vals in proptest::collection::vec(-50.0f64..50.0, 1..20),
            b in 0.1f64..10.0,
        ) {
            let v = Array1::from_vec(vals);
            let once = truncate(&v, b).unwrap();
            let twice = truncate(&once, b).unwrap();
            prop_assert_eq!(&once, &twice);
            for (t, o) in once.iter().zip(v.iter()) {
                prop_assert!(t.abs() <= o.abs() + 1e-15);
                prop_assert!(t.abs() <= b);
            }
        }

        #[test]
        fn clipped_network_is_inside_bound(seed in 0u64..1000, b in 0.01f64..0.2) {
            let mut net = init_network(3, &[4], 2, seed, InitScheme::UniformFanIn).unwrap();
            clip_weights(&mut net, b).unwrap();
            for p in net.params_flat() {
                prop_assert!(p.abs() <= b);
            }
        }
    }
}
