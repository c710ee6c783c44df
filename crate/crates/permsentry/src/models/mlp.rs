//! Attention-gated multilayer perceptron.
//!
//! A dense scoring layer turns the first hidden activation into a
//! softmax distribution that multiplicatively gates that same
//! activation, letting the network weight input features before the
//! deep stack. Trained with Adam on binary cross-entropy, with
//! inverted dropout and early stopping on validation accuracy.

use ndarray::{Array1, Array2};

use crate::eval::TrainingCurve;
use crate::rng::Xoshiro256;

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Linear => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => f64::from(z > 0.0),
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// (outputs, inputs)
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(inputs: usize, outputs: usize, activation: Activation) -> Self {
        DenseLayer {
            weights: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
            activation,
        }
    }

    /// He-uniform init: weights from U(-b, b) with b = sqrt(6 / fan_in),
    /// biases zero.
    pub fn init_he_uniform(&mut self, rng: &mut Xoshiro256) {
        let bound = (6.0 / self.weights.ncols() as f64).sqrt();
        for w in self.weights.iter_mut() {
            *w = rng.uniform(-bound, bound);
        }
    }

    fn affine(&self, input: &Array1<f64>) -> Array1<f64> {
        self.weights.dot(input) + &self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMlp {
    pub layers: Vec<DenseLayer>,
    /// Square scoring layer over the first hidden activation.
    pub attention: DenseLayer,
    pub dropout_rate: f64,
    /// 1-based dense layer indices after which dropout applies.
    pub dropout_positions: Vec<usize>,
    pub rng_seed: u64,
}

impl AttentionMlp {
    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    Train,
    Infer,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax with max subtraction.
pub fn softmax(z: &[f64]) -> Result<Vec<f64>, ModelError> {
    if z.is_empty() || z.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteInput);
    }
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// h ⊙ softmax(score_layer(h)).
pub fn attention_gate(h: &[f64], score_layer: &DenseLayer) -> Result<Vec<f64>, ModelError> {
    if h.len() != score_layer.weights.ncols() {
        return Err(ModelError::DimensionMismatch {
            expected: score_layer.weights.ncols(),
            got: h.len(),
        });
    }
    let input = Array1::from_vec(h.to_vec());
    let scores = score_layer.affine(&input);
    let dist = softmax(scores.as_slice().unwrap())?;
    Ok(h.iter().zip(&dist).map(|(a, s)| a * s).collect())
}

/// The full-size network: dense(input->105, relu) with an attention
/// gate on its activation, ten dense(105->105, relu) layers, then
/// dense(105->1, sigmoid) — 12 dense layers total. Dropout 0.25 after
/// dense layers 3, 6 and 9.
pub fn build_attention_mlp(input_dim: usize, seed: u64) -> AttentionMlp {
    assert!(input_dim >= 1);
    const WIDTH: usize = 105;
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(12);
    layers.push(DenseLayer::new(input_dim, WIDTH, Activation::Relu));
    for _ in 0..10 {
        layers.push(DenseLayer::new(WIDTH, WIDTH, Activation::Relu));
    }
    layers.push(DenseLayer::new(WIDTH, 1, Activation::Sigmoid));
    for layer in &mut layers {
        layer.init_he_uniform(&mut rng);
    }
    let mut attention = DenseLayer::new(WIDTH, WIDTH, Activation::Linear);
    attention.init_he_uniform(&mut rng);
    AttentionMlp {
        layers,
        attention,
        dropout_rate: 0.25,
        dropout_positions: vec![3, 6, 9],
        rng_seed: seed,
    }
}

/// Per-layer state cached during a forward pass, for backprop.
pub struct ForwardCache {
    /// network input
    input: Array1<f64>,
    /// pre-activations per layer
    pre: Vec<Array1<f64>>,
    /// post-activation, post-gate, post-dropout outputs per layer
    out: Vec<Array1<f64>>,
    /// first hidden activation (pre-gate) and its softmax distribution
    gate_input: Array1<f64>,
    gate_dist: Array1<f64>,
    /// inverted-dropout multipliers per layer (empty if none)
    masks: Vec<Option<Array1<f64>>>,
    pub output: f64,
}

/// Run the network. Train mode draws inverted-dropout masks from `rng`
/// (kept units scaled by 1/(1-rate)); infer mode disables dropout with
/// no rescaling.
pub fn mlp_forward(
    model: &AttentionMlp,
    x: &[f64],
    mode: ForwardMode,
    mut rng: Option<&mut Xoshiro256>,
) -> Result<(f64, ForwardCache), ModelError> {
    if x.len() != model.input_dim() {
        return Err(ModelError::DimensionMismatch {
            expected: model.input_dim(),
            got: x.len(),
        });
    }
    let input = Array1::from_vec(x.to_vec());
    let mut pre = Vec::with_capacity(model.layers.len());
    let mut out = Vec::with_capacity(model.layers.len());
    let mut masks = Vec::with_capacity(model.layers.len());
    let mut gate_input = Array1::zeros(0);
    let mut gate_dist = Array1::zeros(0);

    let mut current = input.clone();
    for (index, layer) in model.layers.iter().enumerate() {
        let z = layer.affine(&current);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteActivation);
        }
        let mut a = z.mapv(|v| layer.activation.apply(v));
        if index == 0 {
            gate_input = a.clone();
            let scores = model.attention.affine(&a);
            let dist = softmax(scores.as_slice().unwrap())?;
            gate_dist = Array1::from_vec(dist);
            a = &a * &gate_dist;
        }
        let mask = if mode == ForwardMode::Train
            && model.dropout_rate > 0.0
            && model.dropout_positions.contains(&(index + 1))
        {
            let rng = rng
                .as_deref_mut()
                .expect("train-mode forward needs an RNG for dropout");
            let keep = 1.0 - model.dropout_rate;
            let mask = Array1::from_shape_fn(a.len(), |_| {
                if rng.next_f64() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            a = &a * &mask;
            Some(mask)
        } else {
            None
        };
        pre.push(z);
        out.push(a.clone());
        masks.push(mask);
        current = a;
    }
    let output = current[0];
    Ok((
        output,
        ForwardCache {
            input,
            pre,
            out,
            gate_input,
            gate_dist,
            masks,
            output,
        },
    ))
}

/// Gradients mirroring the parameter shapes.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
    pub attention: (Array2<f64>, Array1<f64>),
}

impl MlpGradients {
    fn zeros_like(model: &AttentionMlp) -> Self {
        MlpGradients {
            layers: model
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.weights.dim()), Array1::zeros(l.bias.len())))
                .collect(),
            attention: (
                Array2::zeros(model.attention.weights.dim()),
                Array1::zeros(model.attention.bias.len()),
            ),
        }
    }

    fn accumulate(&mut self, other: &MlpGradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
        self.attention.0 += &other.attention.0;
        self.attention.1 += &other.attention.1;
    }

    fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.layers {
            *w *= factor;
            *b *= factor;
        }
        self.attention.0 *= factor;
        self.attention.1 *= factor;
    }
}

/// Binary cross-entropy with the probability clamped before the log.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Backprop one sample through sigmoid output, dropout masks, the
/// attention gate (identity path plus softmax Jacobian) and the dense
/// stack.
pub fn mlp_backward(model: &AttentionMlp, cache: &ForwardCache, y: f64) -> (f64, MlpGradients) {
    let loss = bce_loss(cache.output, y);
    let mut grads = MlpGradients::zeros_like(model);

    // sigmoid + BCE collapse to (p - y) at the final pre-activation
    let mut delta: Array1<f64> = Array1::from_vec(vec![cache.output - y]);

    for index in (0..model.layers.len()).rev() {
        let layer = &model.layers[index];
        // delta currently holds dL/dz for this layer, except at entry
        // to the loop body for non-final layers where it holds dL/d(out)
        // and must be pulled back through dropout/gate/activation first.
        if index < model.layers.len() - 1 {
            if let Some(mask) = &cache.masks[index] {
                delta = &delta * mask;
            }
            if index == 0 {
                // out = h ⊙ s with s = softmax(Wa h + ba)
                let h = &cache.gate_input;
                let s = &cache.gate_dist;
                let d_h_direct = &delta * s;
                let d_s = &delta * h;
                let dot = s.dot(&d_s);
                let d_scores = s * &(&d_s - dot);
                let (aw, ab) = &mut grads.attention;
                for (i, &ds_i) in d_scores.iter().enumerate() {
                    ab[i] += ds_i;
                    for (j, &h_j) in h.iter().enumerate() {
                        aw[[i, j]] += ds_i * h_j;
                    }
                }
                let d_h_through = model.attention.weights.t().dot(&d_scores);
                delta = d_h_direct + d_h_through;
            }
            // through the activation
            let z = &cache.pre[index];
            delta = Array1::from_shape_fn(delta.len(), |i| {
                delta[i] * layer.activation.derivative(z[i])
            });
        }
        let upstream = if index == 0 {
            &cache.input
        } else {
            &cache.out[index - 1]
        };
        let (gw, gb) = &mut grads.layers[index];
        for (i, &d_i) in delta.iter().enumerate() {
            gb[i] += d_i;
            for (j, &u_j) in upstream.iter().enumerate() {
                gw[[i, j]] += d_i * u_j;
            }
        }
        if index > 0 {
            delta = layer.weights.t().dot(&delta);
        }
    }
    (loss, grads)
}

/// Adam accumulators mirroring the parameter shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    first_moment: Option<MlpGradientsBox>,
    second_moment: Option<MlpGradientsBox>,
}

// moments reuse the gradient layout
type MlpGradientsBox = MlpGradients;

impl Default for AdamState {
    fn default() -> Self {
        AdamState {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: None,
            second_moment: None,
        }
    }
}

impl AdamState {
    /// Bias-corrected Adam update in place.
    pub fn update(&mut self, model: &mut AttentionMlp, grads: &MlpGradients) {
        if self.first_moment.is_none() {
            self.first_moment = Some(MlpGradients::zeros_like(model));
            self.second_moment = Some(MlpGradients::zeros_like(model));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let m = self.first_moment.as_mut().unwrap();
        let v = self.second_moment.as_mut().unwrap();

        let apply = |param_w: &mut Array2<f64>,
                     param_b: &mut Array1<f64>,
                     grad: &(Array2<f64>, Array1<f64>),
                     m: &mut (Array2<f64>, Array1<f64>),
                     v: &mut (Array2<f64>, Array1<f64>)| {
            for (((p, g), m), v) in param_w
                .iter_mut()
                .zip(grad.0.iter())
                .zip(m.0.iter_mut())
                .zip(v.0.iter_mut())
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p -= self.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + self.epsilon);
            }
            for (((p, g), m), v) in param_b
                .iter_mut()
                .zip(grad.1.iter())
                .zip(m.1.iter_mut())
                .zip(v.1.iter_mut())
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p -= self.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + self.epsilon);
            }
        };

        for (((layer, grad), m), v) in model
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut m.layers)
            .zip(&mut v.layers)
        {
            apply(&mut layer.weights, &mut layer.bias, grad, m, v);
        }
        apply(
            &mut model.attention.weights,
            &mut model.attention.bias,
            &grads.attention,
            &mut m.attention,
            &mut v.attention,
        );
    }
}

fn dataset_accuracy(model: &AttentionMlp, rows: &[Vec<f64>], targets: &[f64]) -> f64 {
    let correct = rows
        .iter()
        .zip(targets)
        .filter(|(row, &y)| {
            let (p, _) = mlp_forward(model, row, ForwardMode::Infer, None).unwrap();
            (p >= 0.5) == (y >= 0.5)
        })
        .count();
    correct as f64 / rows.len().max(1) as f64
}

/// Minibatch Adam training with per-epoch shuffling and early stopping
/// (patience 20 on validation accuracy, best weights kept).
#[allow(clippy::too_many_arguments)]
pub fn train_mlp(
    mut model: AttentionMlp,
    train_rows: &[Vec<f64>],
    train_targets: &[f64],
    valid_rows: &[Vec<f64>],
    valid_targets: &[f64],
    epochs: usize,
    batch_size: usize,
    mut adam: AdamState,
) -> Result<(AttentionMlp, TrainingCurve), ModelError> {
    assert!(batch_size >= 1);
    if train_rows.is_empty() || valid_rows.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    const PATIENCE: usize = 20;

    let mut rng = Xoshiro256::seed_from_u64(model.rng_seed ^ 0x7261_696e); // training stream
    let mut curve = TrainingCurve::default();
    let mut best_model = model.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut since_best = 0usize;

    let mut order: Vec<usize> = (0..train_rows.len()).collect();
    for epoch in 1..=epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(batch_size) {
            let mut grads: Option<MlpGradients> = None;
            let mut batch_loss = 0.0;
            for &i in batch {
                let (_, cache) =
                    mlp_forward(&model, &train_rows[i], ForwardMode::Train, Some(&mut rng))?;
                let (loss, sample_grads) = mlp_backward(&model, &cache, train_targets[i]);
                batch_loss += loss;
                match &mut grads {
                    Some(g) => g.accumulate(&sample_grads),
                    None => grads = Some(sample_grads),
                }
            }
            if !batch_loss.is_finite() {
                return Err(ModelError::DivergedLoss);
            }
            let mut grads = grads.unwrap();
            grads.scale(1.0 / batch.len() as f64);
            adam.update(&mut model, &grads);
            epoch_loss += batch_loss;
        }
        epoch_loss /= train_rows.len() as f64;

        let train_acc = dataset_accuracy(&model, train_rows, train_targets);
        let val_acc = dataset_accuracy(&model, valid_rows, valid_targets);
        curve.push(epoch, train_acc, val_acc, epoch_loss);

        if val_acc > best_val {
            best_val = val_acc;
            best_model = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= PATIENCE {
                break;
            }
        }
    }
    if epochs == 0 {
        best_model = model;
    }
    Ok((best_model, curve))
}
