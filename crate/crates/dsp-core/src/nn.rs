//! Minimal dense feed-forward network in f64: rectifier hidden layers and a
//! linear head that is either a single Q vector or a dueling pair (scalar
//! value stream plus advantage stream sharing the trunk).
//!
//! Everything is plain loops over `Vec<Vec<f64>>` weight matrices: the nets
//! are small, the arithmetic deterministic, and snapshots serialize to JSON
//! as nested arrays with a shape header. Cloning a network is a deep copy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Head layout of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    Single,
    Dueling,
}

/// Learning-step settings: plain stochastic gradient descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStepConfig {
    pub learning_rate: f64,
}

impl TrainStepConfig {
    pub fn new(learning_rate: f64) -> Self {
        TrainStepConfig { learning_rate }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid_argument(format!(
                "learning_rate must be finite and > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// One dense layer: row-major weights (out × in) and a bias per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn glorot(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..out_dim)
            .map(|_| (0..in_dim).map(|_| rng.random_range(-limit..limit)).collect())
            .collect();
        DenseLayer {
            weights,
            biases: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    /// z = Wx + b
    fn affine(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    /// Accumulates dW += dz ⊗ input, db += dz and adds Wᵀ·dz into `d_input`.
    fn backward_into(
        &self,
        input: &[f64],
        dz: &[f64],
        d_input: &mut [f64],
        grads: &mut LayerGrads,
    ) {
        for (o, &g) in dz.iter().enumerate() {
            grads.d_biases[o] += g;
            let row = &self.weights[o];
            let grow = &mut grads.d_weights[o];
            for i in 0..input.len() {
                grow[i] += g * input[i];
                d_input[i] += g * row[i];
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.biases.iter().all(|b| b.is_finite())
            && self.weights.iter().flatten().all(|w| w.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum HeadLayers {
    Single(DenseLayer),
    Dueling {
        value: DenseLayer,
        advantage: DenseLayer,
    },
}

/// Network parameters plus the shape header that makes snapshots
/// self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    input_dim: usize,
    hidden: Vec<usize>,
    n_actions: usize,
    head_mode: HeadMode,
    trunk: Vec<DenseLayer>,
    head: HeadLayers,
}

/// Raw head outputs of a forward pass. Dueling streams are returned
/// unaggregated; combining them is the caller's policy.
#[derive(Debug, Clone, PartialEq)]
pub enum HeadOutput {
    Single(Vec<f64>),
    Dueling { value: f64, advantage: Vec<f64> },
}

/// Parameter gradients with the same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    trunk: Vec<LayerGrads>,
    head: HeadGrads,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<f64>,
}

impl LayerGrads {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LayerGrads {
            d_weights: vec![vec![0.0; in_dim]; out_dim],
            d_biases: vec![0.0; out_dim],
        }
    }

    fn scale(&mut self, f: f64) {
        for row in &mut self.d_weights {
            for w in row {
                *w *= f;
            }
        }
        for b in &mut self.d_biases {
            *b *= f;
        }
    }

    fn is_finite(&self) -> bool {
        self.d_biases.iter().all(|b| b.is_finite())
            && self.d_weights.iter().flatten().all(|w| w.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum HeadGrads {
    Single(LayerGrads),
    Dueling {
        value: LayerGrads,
        advantage: LayerGrads,
    },
}

impl MlpParams {
    /// Fresh network with Glorot-uniform weights and zero biases. Gradient
    /// draws consume `rng` layer by layer in declaration order.
    pub fn new(
        input_dim: usize,
        hidden: &[usize],
        n_actions: usize,
        head_mode: HeadMode,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if input_dim == 0 || n_actions == 0 {
            return Err(Error::invalid_argument(
                "input_dim and n_actions must be >= 1".to_string(),
            ));
        }
        if hidden.contains(&0) {
            return Err(Error::invalid_argument(
                "hidden layer sizes must be >= 1".to_string(),
            ));
        }
        let mut trunk = Vec::with_capacity(hidden.len());
        let mut prev = input_dim;
        for &h in hidden {
            trunk.push(DenseLayer::glorot(prev, h, rng));
            prev = h;
        }
        let head = match head_mode {
            HeadMode::Single => HeadLayers::Single(DenseLayer::glorot(prev, n_actions, rng)),
            HeadMode::Dueling => HeadLayers::Dueling {
                value: DenseLayer::glorot(prev, 1, rng),
                advantage: DenseLayer::glorot(prev, n_actions, rng),
            },
        };
        Ok(MlpParams {
            input_dim,
            hidden: hidden.to_vec(),
            n_actions,
            head_mode,
            trunk,
            head,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn head_mode(&self) -> HeadMode {
        self.head_mode
    }

    /// Number of scalar outputs: `n_actions` for a single head, `1 +
    /// n_actions` (value first) for a dueling head.
    pub fn output_arity(&self) -> usize {
        match self.head_mode {
            HeadMode::Single => self.n_actions,
            HeadMode::Dueling => 1 + self.n_actions,
        }
    }

    fn check_input(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: state.len(),
            });
        }
        Ok(())
    }

    /// Trunk activations: the input to each layer plus the final trunk
    /// output (post-ReLU throughout).
    fn trunk_forward(&self, state: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.trunk.len() + 1);
        acts.push(state.to_vec());
        for layer in &self.trunk {
            let mut z = layer.affine(acts.last().expect("non-empty"));
            for v in &mut z {
                *v = v.max(0.0);
            }
            acts.push(z);
        }
        acts
    }

    /// Deterministic forward pass.
    pub fn forward(&self, state: &[f64]) -> Result<HeadOutput> {
        self.check_input(state)?;
        let acts = self.trunk_forward(state);
        let trunk_out = acts.last().expect("non-empty");
        Ok(match &self.head {
            HeadLayers::Single(layer) => HeadOutput::Single(layer.affine(trunk_out)),
            HeadLayers::Dueling { value, advantage } => HeadOutput::Dueling {
                value: value.affine(trunk_out)[0],
                advantage: advantage.affine(trunk_out),
            },
        })
    }

    /// Backpropagates a per-output loss gradient to fresh parameter
    /// gradients. For a dueling head the gradient layout is `[d_value,
    /// d_advantage...]`.
    pub fn backward(&self, state: &[f64], out_grad: &[f64]) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(state, out_grad, &mut grads)?;
        Ok(grads)
    }

    /// `backward` that accumulates into existing gradients (batch loops).
    pub fn backward_into(
        &self,
        state: &[f64],
        out_grad: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        self.check_input(state)?;
        if out_grad.len() != self.output_arity() {
            return Err(Error::DimensionMismatch {
                expected: self.output_arity(),
                got: out_grad.len(),
            });
        }

        let acts = self.trunk_forward(state);
        let trunk_out = acts.last().expect("non-empty");

        // Head backward, collecting the gradient w.r.t. the trunk output.
        let mut d_trunk_out = vec![0.0; trunk_out.len()];
        match (&self.head, &mut grads.head) {
            (HeadLayers::Single(layer), HeadGrads::Single(g)) => {
                layer.backward_into(trunk_out, out_grad, &mut d_trunk_out, g);
            }
            (
                HeadLayers::Dueling { value, advantage },
                HeadGrads::Dueling {
                    value: gv,
                    advantage: ga,
                },
            ) => {
                value.backward_into(trunk_out, &out_grad[..1], &mut d_trunk_out, gv);
                advantage.backward_into(trunk_out, &out_grad[1..], &mut d_trunk_out, ga);
            }
            _ => {
                return Err(Error::invalid_argument(
                    "gradient buffer head mode does not match network".to_string(),
                ))
            }
        }

        // Trunk backward. ReLU gate: activation > 0 iff pre-activation > 0.
        let mut d_out = d_trunk_out;
        for (idx, layer) in self.trunk.iter().enumerate().rev() {
            let out_act = &acts[idx + 1];
            let input = &acts[idx];
            let dz: Vec<f64> = d_out
                .iter()
                .zip(out_act)
                .map(|(&g, &a)| if a > 0.0 { g } else { 0.0 })
                .collect();
            let mut d_in = vec![0.0; input.len()];
            layer.backward_into(input, &dz, &mut d_in, &mut grads.trunk[idx]);
            d_out = d_in;
        }
        Ok(())
    }

    /// One descent step: every parameter moves by −lr · gradient. Non-finite
    /// gradients are refused before anything is touched.
    pub fn sgd_step(&mut self, grads: &Gradients, cfg: &TrainStepConfig) -> Result<()> {
        cfg.validate()?;
        self.check_grads_shape(grads)?;
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradient".to_string()));
        }
        let lr = cfg.learning_rate;
        for (layer, g) in self.trunk.iter_mut().zip(&grads.trunk) {
            apply(layer, g, lr);
        }
        match (&mut self.head, &grads.head) {
            (HeadLayers::Single(l), HeadGrads::Single(g)) => apply(l, g, lr),
            (
                HeadLayers::Dueling { value, advantage },
                HeadGrads::Dueling {
                    value: gv,
                    advantage: ga,
                },
            ) => {
                apply(value, gv, lr);
                apply(advantage, ga, lr);
            }
            _ => unreachable!("shape checked above"),
        }
        Ok(())
    }

    fn check_grads_shape(&self, grads: &Gradients) -> Result<()> {
        let ok = grads.trunk.len() == self.trunk.len()
            && grads
                .trunk
                .iter()
                .zip(&self.trunk)
                .all(|(g, l)| g.d_biases.len() == l.out_dim() && g.d_weights.len() == l.out_dim())
            && match (&self.head, &grads.head) {
                (HeadLayers::Single(l), HeadGrads::Single(g)) => {
                    g.d_biases.len() == l.out_dim()
                }
                (HeadLayers::Dueling { value, advantage }, HeadGrads::Dueling { value: gv, advantage: ga }) => {
                    gv.d_biases.len() == value.out_dim() && ga.d_biases.len() == advantage.out_dim()
                }
                _ => false,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid_argument(
                "gradient shapes do not match network".to_string(),
            ))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.trunk.iter().all(DenseLayer::is_finite)
            && match &self.head {
                HeadLayers::Single(l) => l.is_finite(),
                HeadLayers::Dueling { value, advantage } => {
                    value.is_finite() && advantage.is_finite()
                }
            }
    }

    /// JSON snapshot (nested weight/bias arrays plus the shape header).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let net: MlpParams = serde_json::from_str(s)?;
        net.validate_shapes()?;
        Ok(net)
    }

    fn validate_shapes(&self) -> Result<()> {
        let mut prev = self.input_dim;
        if self.trunk.len() != self.hidden.len() {
            return Err(Error::invalid_data("trunk/hidden count mismatch"));
        }
        for (layer, &h) in self.trunk.iter().zip(&self.hidden) {
            if layer.out_dim() != h || layer.weights.iter().any(|r| r.len() != prev) {
                return Err(Error::invalid_data("trunk layer shape mismatch"));
            }
            if layer.biases.len() != layer.out_dim() {
                return Err(Error::invalid_data("bias length mismatch"));
            }
            prev = h;
        }
        let head_ok = match (&self.head, self.head_mode) {
            (HeadLayers::Single(l), HeadMode::Single) => {
                l.out_dim() == self.n_actions && l.weights.iter().all(|r| r.len() == prev)
            }
            (HeadLayers::Dueling { value, advantage }, HeadMode::Dueling) => {
                value.out_dim() == 1
                    && advantage.out_dim() == self.n_actions
                    && value.weights.iter().all(|r| r.len() == prev)
                    && advantage.weights.iter().all(|r| r.len() == prev)
            }
            _ => false,
        };
        if head_ok {
            Ok(())
        } else {
            Err(Error::invalid_data("head shape mismatch"))
        }
    }

    /// Trunk pre-activations (before the rectifier) per hidden layer.
    /// Gradient checks use this to steer probes away from rectifier kinks.
    pub fn trunk_preactivations(&self, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(state)?;
        let mut pre = Vec::with_capacity(self.trunk.len());
        let mut input = state.to_vec();
        for layer in &self.trunk {
            let z = layer.affine(&input);
            input = z.iter().map(|v| v.max(0.0)).collect();
            pre.push(z);
        }
        Ok(pre)
    }

    /// Flattened read-only view of all parameters; test instrumentation.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push_layer = |l: &DenseLayer| {
            for row in &l.weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&l.biases);
        };
        for l in &self.trunk {
            push_layer(l);
        }
        match &self.head {
            HeadLayers::Single(l) => push_layer(l),
            HeadLayers::Dueling { value, advantage } => {
                push_layer(value);
                push_layer(advantage);
            }
        }
        out
    }

    /// Mutates one parameter by flat index; finite-difference probes only.
    pub fn nudge_param(&mut self, flat_index: usize, delta: f64) {
        let mut k = flat_index;
        let mut layers: Vec<&mut DenseLayer> = self.trunk.iter_mut().collect();
        match &mut self.head {
            HeadLayers::Single(l) => layers.push(l),
            HeadLayers::Dueling { value, advantage } => {
                layers.push(value);
                layers.push(advantage);
            }
        }
        for l in layers {
            let nw = l.out_dim() * l.in_dim();
            if k < nw {
                let row = k / l.in_dim();
                let col = k % l.in_dim();
                l.weights[row][col] += delta;
                return;
            }
            k -= nw;
            if k < l.biases.len() {
                l.biases[k] += delta;
                return;
            }
            k -= l.biases.len();
        }
        panic!("flat index {flat_index} out of range");
    }
}

fn apply(layer: &mut DenseLayer, g: &LayerGrads, lr: f64) {
    for (row, grow) in layer.weights.iter_mut().zip(&g.d_weights) {
        for (w, dw) in row.iter_mut().zip(grow) {
            *w -= lr * dw;
        }
    }
    for (b, db) in layer.biases.iter_mut().zip(&g.d_biases) {
        *b -= lr * db;
    }
}

impl Gradients {
    pub fn zeros_like(net: &MlpParams) -> Self {
        let trunk = net
            .trunk
            .iter()
            .map(|l| LayerGrads::zeros(l.in_dim(), l.out_dim()))
            .collect();
        let head = match &net.head {
            HeadLayers::Single(l) => HeadGrads::Single(LayerGrads::zeros(l.in_dim(), l.out_dim())),
            HeadLayers::Dueling { value, advantage } => HeadGrads::Dueling {
                value: LayerGrads::zeros(value.in_dim(), value.out_dim()),
                advantage: LayerGrads::zeros(advantage.in_dim(), advantage.out_dim()),
            },
        };
        Gradients { trunk, head }
    }

    pub fn scale(&mut self, f: f64) {
        for g in &mut self.trunk {
            g.scale(f);
        }
        match &mut self.head {
            HeadGrads::Single(g) => g.scale(f),
            HeadGrads::Dueling { value, advantage } => {
                value.scale(f);
                advantage.scale(f);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.trunk.iter().all(LayerGrads::is_finite)
            && match &self.head {
                HeadGrads::Single(g) => g.is_finite(),
                HeadGrads::Dueling { value, advantage } => {
                    value.is_finite() && advantage.is_finite()
                }
            }
    }

    /// Flattened view matching `MlpParams::flat_params` ordering.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push = |g: &LayerGrads| {
            for row in &g.d_weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&g.d_biases);
        };
        for g in &self.trunk {
            push(g);
        }
        match &self.head {
            HeadGrads::Single(g) => push(g),
            HeadGrads::Dueling { value, advantage } => {
                push(value);
                push(advantage);
            }
        }
        out
    }
}
