use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{dloss_doutput, per_example_loss};
use super::{LossKind, MathError};

/// Prediction task a model is trained for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Regression,
    BinaryClassification,
}

/// Hidden-layer nonlinearity. Kept as a config field so it can be swapped
/// without touching the backprop code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Architecture of a scalar-output model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// Linear regressor `x -> w.x + b`.
    Linear { dim: usize },
    /// Linear logit model for binary classification.
    LogisticLinear { dim: usize },
    /// Two-hidden-layer perceptron `dim -> hidden -> hidden -> 1` emitting a
    /// logit.
    Mlp {
        dim: usize,
        hidden: usize,
        activation: Activation,
    },
}

impl ModelSpec {
    pub fn mlp(dim: usize, hidden: usize) -> Self {
        ModelSpec::Mlp {
            dim,
            hidden,
            activation: Activation::Relu,
        }
    }

    pub fn input_dim(&self) -> usize {
        match *self {
            ModelSpec::Linear { dim } => dim,
            ModelSpec::LogisticLinear { dim } => dim,
            ModelSpec::Mlp { dim, .. } => dim,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            ModelSpec::Linear { .. } => Task::Regression,
            ModelSpec::LogisticLinear { .. } | ModelSpec::Mlp { .. } => Task::BinaryClassification,
        }
    }

    /// Loss paired with the architecture: squared error for regression,
    /// BCE-with-logits for classification.
    pub fn loss_kind(&self) -> LossKind {
        match self.task() {
            Task::Regression => LossKind::SquaredError,
            Task::BinaryClassification => LossKind::BceWithLogits,
        }
    }

    fn layer_dims(&self) -> Vec<(usize, usize)> {
        match *self {
            ModelSpec::Linear { dim } | ModelSpec::LogisticLinear { dim } => vec![(dim, 1)],
            ModelSpec::Mlp { dim, hidden, .. } => {
                vec![(dim, hidden), (hidden, hidden), (hidden, 1)]
            }
        }
    }

    fn activation(&self) -> Activation {
        match *self {
            ModelSpec::Mlp { activation, .. } => activation,
            _ => Activation::Relu,
        }
    }
}

/// One dense layer; `weights` is `out x in`, applied as `z = x W^T + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    fn zeros_like(&self) -> DenseLayer {
        DenseLayer {
            weights: Array2::zeros(self.weights.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

/// Gradient of a scalar objective w.r.t. every model parameter, mirroring
/// the layer structure.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

impl Gradients {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend(layer.weights.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    pub fn scaled(mut self, factor: f64) -> Gradients {
        for layer in &mut self.layers {
            layer.weights.mapv_inplace(|g| g * factor);
            layer.bias.mapv_inplace(|g| g * factor);
        }
        self
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }
}

/// Intermediate activations from a forward pass, reused by backprop.
pub struct ForwardCache {
    /// Pre-activation values per layer, shape `N x out`.
    pre: Vec<Array2<f64>>,
    /// Post-activation values per hidden layer, shape `N x out`.
    post: Vec<Array2<f64>>,
}

/// A parameterized map from feature rows to one scalar output per row
/// (a logit for classification, a raw value for regression).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Model {
    spec: ModelSpec,
    layers: Vec<DenseLayer>,
}

impl Model {
    /// Fan-in-scaled symmetric uniform init, drawn in a fixed order from the
    /// supplied RNG so trajectories are reproducible.
    pub fn init(spec: ModelSpec, rng: &mut impl Rng) -> Model {
        let layers = spec
            .layer_dims()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
                    rng.random_range(-bound..bound)
                });
                let bias = Array1::from_shape_fn(fan_out, |_| rng.random_range(-bound..bound));
                DenseLayer { weights, bias }
            })
            .collect();
        Model { spec, layers }
    }

    pub fn seeded(spec: ModelSpec, seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Model::init(spec, &mut rng)
    }

    /// Build a model from explicit layers. Shapes must match the spec.
    pub fn from_layers(spec: ModelSpec, layers: Vec<DenseLayer>) -> Result<Model, MathError> {
        let dims = spec.layer_dims();
        if layers.len() != dims.len() {
            return Err(MathError::InvalidConfig(format!(
                "expected {} layers, got {}",
                dims.len(),
                layers.len()
            )));
        }
        for (layer, (fan_in, fan_out)) in layers.iter().zip(&dims) {
            if layer.weights.dim() != (*fan_out, *fan_in) || layer.bias.len() != *fan_out {
                return Err(MathError::InvalidConfig(format!(
                    "layer shape {:?} does not match ({fan_out}, {fan_in})",
                    layer.weights.dim()
                )));
            }
        }
        Ok(Model { spec, layers })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn task(&self) -> Task {
        self.spec.task()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            out.extend(layer.weights.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    /// Overwrite all parameters from a flat slice in `flat_params` order.
    pub fn set_flat_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "flat parameter length");
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
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().all(|w| w.is_finite()) && l.bias.iter().all(|b| b.is_finite()))
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<(), MathError> {
        if x.ncols() != self.spec.input_dim() {
            return Err(MathError::DimensionMismatch {
                expected: self.spec.input_dim(),
                actual: x.ncols(),
            });
        }
        Ok(())
    }

    /// Forward pass over an `N x D` batch; returns the `N` scalar outputs.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, MathError> {
        Ok(self.forward_cached(x)?.0)
    }

    /// Forward pass that keeps per-layer activations for backprop.
    pub fn forward_cached(
        &self,
        x: ArrayView2<f64>,
    ) -> Result<(Array1<f64>, ForwardCache), MathError> {
        self.check_input(&x)?;
        let act = self.spec.activation();
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len().saturating_sub(1));
        let mut current = x.to_owned();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights.t());
            z += &layer.bias;
            pre.push(z.clone());
            if idx + 1 < self.layers.len() {
                z.mapv_inplace(|v| act.apply(v));
                post.push(z.clone());
                current = z;
            } else {
                current = z;
            }
        }
        let outputs = current.index_axis(Axis(1), 0).to_owned();
        Ok((outputs, ForwardCache { pre, post }))
    }

    /// Backprop a gradient w.r.t. the scalar outputs down to all parameters.
    ///
    /// `doutputs[i]` is the partial derivative of the objective w.r.t. the
    /// model output on row `i`; the cache must come from `forward_cached` on
    /// the same batch.
    pub fn backward(
        &self,
        x: ArrayView2<f64>,
        cache: &ForwardCache,
        doutputs: &Array1<f64>,
    ) -> Gradients {
        let act = self.spec.activation();
        let n = x.nrows();
        let mut grads: Vec<DenseLayer> = self.layers.iter().map(|l| l.zeros_like()).collect();
        // dz starts as the output gradient, shape N x 1.
        let mut dz = doutputs
            .clone()
            .into_shape_with_order((n, 1))
            .expect("reshape output gradient");
        for idx in (0..self.layers.len()).rev() {
            let input_act = if idx == 0 {
                x.to_owned()
            } else {
                cache.post[idx - 1].clone()
            };
            grads[idx].weights = dz.t().dot(&input_act);
            grads[idx].bias = dz.sum_axis(Axis(0));
            if idx > 0 {
                let da = dz.dot(&self.layers[idx].weights);
                let gate = cache.pre[idx - 1].mapv(|z| act.derivative(z));
                dz = da * &gate;
            }
        }
        Gradients { layers: grads }
    }

    /// Mean per-example loss over the batch plus its parameter gradient.
    pub fn grad_params(
        &self,
        x: ArrayView2<f64>,
        y: &Array1<f64>,
        kind: LossKind,
    ) -> Result<(f64, Gradients), MathError> {
        let (outputs, cache) = self.forward_cached(x)?;
        let losses = per_example_loss(kind, &outputs, y)?;
        let mean_loss = losses.mean().unwrap_or(0.0);
        let scale = 1.0 / x.nrows() as f64;
        let dout = dloss_doutput(kind, &outputs, y)? * scale;
        Ok((mean_loss, self.backward(x, &cache, &dout)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};

    fn linear_with(weights: Vec<f64>, bias: f64) -> Model {
        let dim = weights.len();
        Model::from_layers(
            ModelSpec::Linear { dim },
            vec![DenseLayer {
                weights: Array2::from_shape_vec((1, dim), weights).unwrap(),
                bias: array![bias],
            }],
        )
        .unwrap()
    }

    #[test]
    fn linear_forward_zero_input() {
        let model = linear_with(vec![1.0, 1.0, 1.0], 0.0);
        let x = Array2::zeros((1, 3));
        let out = model.forward(x.view()).unwrap();
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn linear_forward_basis_vector() {
        let model = linear_with(vec![1.0, 0.0, 0.0], 0.0);
        let x = array![[1.0, 0.0, 0.0]];
        let out = model.forward(x.view()).unwrap();
        assert_eq!(out[0], 1.0);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let model = linear_with(vec![1.0, 2.0], 0.0);
        let x = Array2::zeros((4, 3));
        assert!(matches!(
            model.forward(x.view()),
            Err(MathError::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }

    #[test]
    fn forward_output_count_matches_batch() {
        let model = Model::seeded(ModelSpec::mlp(4, 6), 3);
        let x = Array2::from_shape_fn((17, 4), |(i, j)| (i as f64 - j as f64) / 7.0);
        assert_eq!(model.forward(x.view()).unwrap().len(), 17);
    }

    /// Straight-line scalar re-implementation of the MLP forward pass,
    /// independent of the ndarray-based code path.
    fn scalar_mlp_forward(model: &Model, x: &[f64]) -> f64 {
        let mut current: Vec<f64> = x.to_vec();
        for (idx, layer) in model.layers().iter().enumerate() {
            let mut next = vec![0.0; layer.bias.len()];
            for (o, slot) in next.iter_mut().enumerate() {
                let mut acc = layer.bias[o];
                for (i, &v) in current.iter().enumerate() {
                    acc += layer.weights[[o, i]] * v;
                }
                *slot = if idx + 1 < model.layers().len() {
                    acc.max(0.0)
                } else {
                    acc
                };
            }
            current = next;
        }
        current[0]
    }

    #[test]
    fn mlp_forward_matches_scalar_oracle() {
        let model = Model::seeded(
            ModelSpec::Mlp {
                dim: 2,
                hidden: 3,
                activation: Activation::Relu,
            },
            0,
        );
        let x = array![[0.5, -0.5]];
        let out = model.forward(x.view()).unwrap();
        let expected = scalar_mlp_forward(&model, &[0.5, -0.5]);
        assert_relative_eq!(out[0], expected, max_relative = 1e-15);
    }

    #[test]
    fn single_example_logistic_gradient_closed_form() {
        // w = 0, x = e1, y = 1: d(mean BCE)/dw1 = (sigmoid(0) - 1) * 1 = -0.5
        let model = linear_with(vec![0.0, 0.0], 0.0);
        let x = array![[1.0, 0.0]];
        let y = array![1.0];
        let (_, grads) = model
            .grad_params(x.view(), &y, LossKind::BceWithLogits)
            .unwrap();
        assert_relative_eq!(grads.layers[0].weights[[0, 0]], -0.5, max_relative = 1e-15);
        assert_relative_eq!(grads.layers[0].weights[[0, 1]], 0.0);
    }

    #[test]
    fn flat_params_roundtrip() {
        let model = Model::seeded(ModelSpec::mlp(3, 5), 11);
        let flat = model.flat_params();
        let mut other = Model::seeded(ModelSpec::mlp(3, 5), 99);
        other.set_flat_params(&flat);
        assert_eq!(model.flat_params(), other.flat_params());
    }
}
