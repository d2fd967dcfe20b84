//! Fully-connected multi-layer perceptron with ReLU hidden layers, trained
//! by backpropagation with adaptive-moment gradient descent, mini-batches,
//! and early stopping on a held-out validation slice.
//!
//! One implementation serves both model kinds: a binary classifier (logistic
//! output, cross-entropy loss) and a regressor (identity output, squared
//! loss).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SizerError};
use crate::util::{derive_seed, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    /// Raw linear output (regression).
    Identity,
    /// Sigmoid probability (binary classification).
    Logistic,
}

/// Optimiser and schedule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// L2 penalty on weights (not biases).
    pub l2: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 500,
            patience: 20,
            l2: 0.0,
        }
    }
}

/// Architecture plus learning configuration. `hidden_layers = [a, b, c]`
/// denotes three ReLU hidden layers of those widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub hidden_layers: Vec<usize>,
    pub output: OutputActivation,
    #[serde(default)]
    pub learning: LearnConfig,
}

impl MlpSpec {
    pub fn classifier(hidden: &[usize]) -> Self {
        MlpSpec {
            hidden_layers: hidden.to_vec(),
            output: OutputActivation::Logistic,
            learning: LearnConfig::default(),
        }
    }

    pub fn regressor(hidden: &[usize]) -> Self {
        MlpSpec {
            hidden_layers: hidden.to_vec(),
            output: OutputActivation::Identity,
            learning: LearnConfig::default(),
        }
    }

    pub fn describe(&self) -> String {
        let sizes: Vec<String> = self.hidden_layers.iter().map(|s| s.to_string()).collect();
        format!("MLP({})", sizes.join(", "))
    }

    fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() || self.hidden_layers.iter().any(|&s| s == 0) {
            return Err(SizerError::InvalidArgument(
                "mlp: at least one hidden layer, all sizes >= 1".into(),
            ));
        }
        if self.learning.batch_size == 0 || self.learning.max_epochs == 0 {
            return Err(SizerError::InvalidArgument(
                "mlp: batch_size and max_epochs must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One dense layer; weights are row-major `[input][output]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub output: OutputActivation,
}

/// Per-layer gradients in the same layout as [`Layer`].
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    /// Forward pass for one feature row.
    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = layer.biases.clone();
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                for (j, &w) in row.iter().enumerate() {
                    z[j] += ai * w;
                }
            }
            if li < last {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            a = z;
        }
        match self.output {
            OutputActivation::Identity => a[0],
            OutputActivation::Logistic => sigmoid(a[0]),
        }
    }

    /// Batch prediction: probabilities for a classifier, values for a
    /// regressor. Callers apply the 0.5 decision threshold themselves.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.input_dim() {
            return Err(SizerError::InvalidArgument(format!(
                "mlp: expected {} features, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        Ok(x.iter_rows().map(|r| self.forward(r)).collect())
    }

    /// Mean loss over a batch: cross-entropy for logistic output, half mean
    /// squared error for identity output, plus the L2 penalty.
    pub fn loss(&self, x: &Matrix, y: &[f64], l2: f64) -> f64 {
        let n = x.rows() as f64;
        let mut total = 0.0;
        for (row, &target) in x.iter_rows().zip(y) {
            let (z, _) = self.forward_cached(row);
            total += match self.output {
                // Numerically stable logistic cross-entropy on the logit.
                OutputActivation::Logistic => {
                    z.max(0.0) - z * target + (1.0 + (-z.abs()).exp()).ln()
                }
                OutputActivation::Identity => 0.5 * (z - target) * (z - target),
            };
        }
        let mut penalty = 0.0;
        if l2 > 0.0 {
            for layer in &self.layers {
                penalty += layer.weights.iter().map(|w| w * w).sum::<f64>();
            }
        }
        total / n + 0.5 * l2 * penalty
    }

    /// Output logit plus per-layer activations (input inclusive) for
    /// backpropagation.
    fn forward_cached(&self, x: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let a = acts.last().unwrap();
            let mut z = layer.biases.clone();
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                for (j, &w) in row.iter().enumerate() {
                    z[j] += ai * w;
                }
            }
            if li < last {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        let z_out = acts.last().unwrap()[0];
        (z_out, acts)
    }

    /// Post-ReLU activations of every hidden layer for one input row.
    /// Exposed for inspection; the gradient oracle uses it to keep its
    /// finite-difference probes away from the ReLU kink.
    pub fn hidden_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let (_, acts) = self.forward_cached(x);
        acts[1..acts.len() - 1].to_vec()
    }

    /// Mean-loss gradients over a batch by backpropagation. For both loss
    /// functions the output delta collapses to `(prediction - target) / n`.
    pub fn gradients(&self, x: &Matrix, y: &[f64], l2: f64) -> Vec<LayerGrads> {
        let mut grads: Vec<LayerGrads> = self
            .layers
            .iter()
            .map(|l| LayerGrads {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect();
        let n = x.rows() as f64;
        for (row, &target) in x.iter_rows().zip(y) {
            let (z_out, acts) = self.forward_cached(row);
            let pred = match self.output {
                OutputActivation::Logistic => sigmoid(z_out),
                OutputActivation::Identity => z_out,
            };
            // delta for the topmost layer
            let mut delta = vec![(pred - target) / n];
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let a_in = &acts[li];
                let g = &mut grads[li];
                for (i, &ai) in a_in.iter().enumerate() {
                    if ai != 0.0 {
                        let row = &mut g.weights[i * layer.outputs..(i + 1) * layer.outputs];
                        for (j, &d) in delta.iter().enumerate() {
                            row[j] += ai * d;
                        }
                    }
                }
                for (j, &d) in delta.iter().enumerate() {
                    g.biases[j] += d;
                }
                if li > 0 {
                    // Propagate through W then the ReLU of the layer below.
                    let mut next = vec![0.0; layer.inputs];
                    for (i, slot) in next.iter_mut().enumerate() {
                        let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                        let mut acc = 0.0;
                        for (j, &d) in delta.iter().enumerate() {
                            acc += row[j] * d;
                        }
                        // ReLU derivative from the cached activation.
                        *slot = if acts[li][i] > 0.0 { acc } else { 0.0 };
                    }
                    delta = next;
                }
            }
        }
        if l2 > 0.0 {
            for (g, l) in grads.iter_mut().zip(&self.layers) {
                for (gw, w) in g.weights.iter_mut().zip(&l.weights) {
                    *gw += l2 * w;
                }
            }
        }
        grads
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Standard normal draw (Box-Muller) for weight initialisation.
fn normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u1: f64 = rng.random();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.random();
        return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    }
}

fn init_model(spec: &MlpSpec, inputs: usize, rng: &mut impl Rng) -> MlpModel {
    let mut sizes = vec![inputs];
    sizes.extend(&spec.hidden_layers);
    sizes.push(1);
    let mut layers = Vec::new();
    for w in sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        // He initialisation for the ReLU stack; the output layer gets the
        // smaller Xavier-style scale.
        let std = if fan_out == 1 && layers.len() == spec.hidden_layers.len() {
            (1.0 / fan_in as f64).sqrt()
        } else {
            (2.0 / fan_in as f64).sqrt()
        };
        layers.push(Layer {
            weights: (0..fan_in * fan_out).map(|_| std * normal(rng)).collect(),
            biases: vec![0.0; fan_out],
            inputs: fan_in,
            outputs: fan_out,
        });
    }
    MlpModel {
        layers,
        output: spec.output,
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    fn new(model: &MlpModel) -> Self {
        let shape: Vec<Vec<f64>> = model
            .layers
            .iter()
            .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]])
            .collect();
        Adam {
            m: shape.clone(),
            v: shape,
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &[LayerGrads], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for (li, layer) in model.layers.iter_mut().enumerate() {
            for (slot, (params, grad)) in [
                (&mut layer.weights, &grads[li].weights),
                (&mut layer.biases, &grads[li].biases),
            ]
            .into_iter()
            .enumerate()
            {
                let (m, v) = (&mut self.m[li * 2 + slot], &mut self.v[li * 2 + slot]);
                for (k, (p, &g)) in params.iter_mut().zip(grad).enumerate() {
                    m[k] = B1 * m[k] + (1.0 - B1) * g;
                    v[k] = B2 * v[k] + (1.0 - B2) * g * g;
                    let m_hat = m[k] / bc1;
                    let v_hat = v[k] / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + EPS);
                }
            }
        }
    }
}

/// Train an MLP on pre-scaled features. Deterministic for a fixed seed.
///
/// A 10% slice (when at least 10 rows are available) is held out for early
/// stopping: training stops after `patience` epochs without validation-loss
/// improvement and the best-epoch weights are restored.
pub fn fit_mlp(spec: &MlpSpec, x: &Matrix, y: &[f64], seed: u64) -> Result<MlpModel> {
    spec.validate()?;
    if x.rows() == 0 {
        return Err(SizerError::InvalidArgument("mlp: empty training set".into()));
    }
    if x.rows() != y.len() {
        return Err(SizerError::InvalidArgument(format!(
            "mlp: {} rows but {} targets",
            x.rows(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SizerError::InvalidArgument("mlp: non-finite target".into()));
    }
    if spec.output == OutputActivation::Logistic && y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(SizerError::InvalidArgument(
            "mlp: classifier targets must be 0 or 1".into(),
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, &["mlp"]));
    let mut model = init_model(spec, x.cols(), &mut rng);
    let cfg = &spec.learning;

    // Hold out a validation slice when the set is big enough to afford one.
    let n = x.rows();
    let n_val = if n >= 10 { (n / 10).max(1) } else { 0 };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (val_idx, train_idx) = order.split_at(n_val);
    let x_train = x.select_rows(train_idx);
    let y_train: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
    let (x_val, y_val) = if n_val > 0 {
        (
            x.select_rows(val_idx),
            val_idx.iter().map(|&i| y[i]).collect::<Vec<f64>>(),
        )
    } else {
        (Matrix::with_cols(x.cols()), Vec::new())
    };

    let mut adam = Adam::new(&model);
    let mut best = model.clone();
    let mut best_val = f64::INFINITY;
    let mut stale = 0usize;

    let n_train = x_train.rows();
    let mut idx: Vec<usize> = (0..n_train).collect();
    for _epoch in 0..cfg.max_epochs {
        idx.shuffle(&mut rng);
        for chunk in idx.chunks(cfg.batch_size) {
            let xb = x_train.select_rows(chunk);
            let yb: Vec<f64> = chunk.iter().map(|&i| y_train[i]).collect();
            let grads = model.gradients(&xb, &yb, cfg.l2);
            adam.step(&mut model, &grads, cfg.learning_rate);
        }
        if n_val > 0 {
            let vl = model.loss(&x_val, &y_val, 0.0);
            if vl < best_val - 1e-12 {
                best_val = vl;
                best = model.clone();
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
    }
    Ok(if n_val > 0 { best } else { model })
}
