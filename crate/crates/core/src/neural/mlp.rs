//! Dense multilayer perceptron whose output is reshaped to `d × q` and
//! normalised with a softmax over each row.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied inside the logarithm of the cross-entropy.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    /// Linear layer followed by a softmax over each group of `q` outputs.
    Softmax,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 || z.is_nan() {
                    z
                } else {
                    0.0
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Softmax => z,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Softmax => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Layer {
        Layer {
            inputs,
            outputs,
            activation,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Uniform in `±1/sqrt(fan_in)` for weights and bias.
    pub fn random<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Layer {
        let bound = 1.0 / (inputs.max(1) as f64).sqrt();
        let mut draw = || rng.gen_range(-bound..bound);
        let weights = (0..inputs * outputs).map(|_| draw()).collect();
        let bias = (0..outputs).map(|_| draw()).collect();
        Layer { inputs, outputs, activation, weights, bias }
    }

    /// `out[b×outputs] = x[b×inputs] · Wᵀ + bias`, then the activation.
    fn forward(&self, x: &[f64], batch: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(batch * self.outputs);
        for _ in 0..batch {
            out.extend_from_slice(&self.bias);
        }
        // SAFETY: slices cover m×k, k×n and m×n with the given strides.
        unsafe {
            matrixmultiply::dgemm(
                batch,
                self.inputs,
                self.outputs,
                1.0,
                x.as_ptr(),
                self.inputs as isize,
                1,
                self.weights.as_ptr(),
                1,
                self.inputs as isize,
                1.0,
                out.as_mut_ptr(),
                self.outputs as isize,
                1,
            );
        }
        if self.activation != Activation::Softmax {
            for v in &mut out {
                *v = self.activation.apply(*v);
            }
        }
        out
    }
}

/// Parameter gradients, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    /// Rows of the output matrix (notes).
    pub d: usize,
    /// Columns of the output matrix (distinct nodes).
    pub q: usize,
}

impl Mlp {
    /// Hidden layers of the given widths and activation, then a `d·q` softmax layer.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], activation: Activation, d: usize, q: usize, rng: &mut R) -> Mlp {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = input_dim;
        for &h in hidden {
            layers.push(Layer::random(width, h, activation, rng));
            width = h;
        }
        layers.push(Layer::random(width, d * q, Activation::Softmax, rng));
        Mlp { layers, d, q }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let last = self.layers.last().ok_or_else(|| Error::InvalidConfig("model has no layers".into()))?;
        if last.activation != Activation::Softmax || last.outputs != self.d * self.q {
            return Err(Error::InvalidConfig(format!(
                "final layer must be a softmax layer of width d·q = {}",
                self.d * self.q
            )));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::DimensionMismatch(format!("layer {} outputs {} but layer {} expects {}", i, pair[0].outputs, i + 1, pair[1].inputs)));
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::DimensionMismatch(format!("layer {i} parameter arrays do not match its shape")));
            }
            if i + 1 < self.layers.len() && l.activation == Activation::Softmax {
                return Err(Error::InvalidConfig("softmax is only allowed on the final layer".into()));
            }
        }
        Ok(())
    }

    fn check_batch(&self, inputs: &[f64], batch: usize) -> Result<()> {
        if inputs.len() != batch * self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {batch} inputs of length {}, got {} values",
                self.input_dim(),
                inputs.len()
            )));
        }
        Ok(())
    }

    /// Activations of every layer; entry 0 is the input, the last entry the logits.
    fn activations(&self, inputs: &[f64], batch: usize) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(inputs.to_vec());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("input pushed"), batch);
            acts.push(next);
        }
        acts
    }

    /// Pre-softmax outputs for a batch, `batch × d·q`.
    pub fn logits(&self, inputs: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.check_batch(inputs, batch)?;
        Ok(self.activations(inputs, batch).pop().expect("at least one layer"))
    }

    /// Row-softmax probabilities for one input: `d × q`, row-major.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.logits(input, 1)?;
        softmax_rows(&mut out, self.q, 1.0);
        Ok(out)
    }

    /// Mean cross-entropy over a batch and its parameter gradients.
    ///
    /// `targets` holds `d` node indices per sample.
    pub fn loss_and_gradients(&self, inputs: &[f64], targets: &[usize], batch: usize) -> Result<(f64, Gradients)> {
        self.check_batch(inputs, batch)?;
        self.check_targets(targets, batch)?;
        let mut acts = self.activations(inputs, batch);
        let mut probs = acts.pop().expect("logits");
        softmax_rows(&mut probs, self.q, 1.0);
        let loss = batch_loss(&probs, targets, self.q, self.d, batch);

        // dL/dlogits = (p - y) / (d · batch)
        let scale = 1.0 / (self.d * batch) as f64;
        let mut delta = probs;
        for (row, &t) in targets.iter().enumerate() {
            delta[row * self.q + t] -= 1.0;
        }
        for v in &mut delta {
            *v *= scale;
        }

        let n = self.layers.len();
        let mut gw = vec![Vec::new(); n];
        let mut gb = vec![Vec::new(); n];
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let x = &acts[l];
            let mut dw = vec![0.0; layer.outputs * layer.inputs];
            // SAFETY: dW[out×in] = deltaᵀ[out×batch] · x[batch×in]
            unsafe {
                matrixmultiply::dgemm(
                    layer.outputs,
                    batch,
                    layer.inputs,
                    1.0,
                    delta.as_ptr(),
                    1,
                    layer.outputs as isize,
                    x.as_ptr(),
                    layer.inputs as isize,
                    1,
                    0.0,
                    dw.as_mut_ptr(),
                    layer.inputs as isize,
                    1,
                );
            }
            let mut db = vec![0.0; layer.outputs];
            for chunk in delta.chunks(layer.outputs) {
                for (acc, v) in db.iter_mut().zip(chunk) {
                    *acc += v;
                }
            }
            gw[l] = dw;
            gb[l] = db;
            if l == 0 {
                break;
            }
            let mut dx = vec![0.0; batch * layer.inputs];
            // SAFETY: dx[batch×in] = delta[batch×out] · W[out×in]
            unsafe {
                matrixmultiply::dgemm(
                    batch,
                    layer.outputs,
                    layer.inputs,
                    1.0,
                    delta.as_ptr(),
                    layer.outputs as isize,
                    1,
                    layer.weights.as_ptr(),
                    layer.inputs as isize,
                    1,
                    0.0,
                    dx.as_mut_ptr(),
                    layer.inputs as isize,
                    1,
                );
            }
            let below = self.layers[l - 1].activation;
            for (g, &a) in dx.iter_mut().zip(x) {
                *g *= below.derivative_from_output(a);
            }
            delta = dx;
        }
        Ok((loss, Gradients { weights: gw, bias: gb }))
    }

    /// Mean cross-entropy over a batch without gradients.
    pub fn batch_loss(&self, inputs: &[f64], targets: &[usize], batch: usize) -> Result<f64> {
        self.check_targets(targets, batch)?;
        let mut probs = self.logits(inputs, batch)?;
        softmax_rows(&mut probs, self.q, 1.0);
        Ok(batch_loss(&probs, targets, self.q, self.d, batch))
    }

    fn check_targets(&self, targets: &[usize], batch: usize) -> Result<()> {
        if targets.len() != batch * self.d {
            return Err(Error::DimensionMismatch(format!("expected {} targets, got {}", batch * self.d, targets.len())));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= self.q) {
            return Err(Error::DimensionMismatch(format!("target node {t} outside 0..{}", self.q)));
        }
        Ok(())
    }
}

fn batch_loss(probs: &[f64], targets: &[usize], q: usize, d: usize, batch: usize) -> f64 {
    let total: f64 = targets
        .iter()
        .enumerate()
        .map(|(row, &t)| clamped_log_loss(probs[row * q + t]))
        .sum();
    total / (d * batch) as f64
}

fn clamped_log_loss(p: f64) -> f64 {
    if p.is_nan() {
        p
    } else {
        -p.max(LOG_CLAMP).ln()
    }
}

/// In-place softmax over consecutive groups of `q` values, with temperature.
pub fn softmax_rows(values: &mut [f64], q: usize, temperature: f64) {
    for row in values.chunks_mut(q) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = ((*v - max) / temperature).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// `-(1/d) Σ_j Σ_k L_jk log P_jk` for a `d × q` prediction and one-hot target.
pub fn cross_entropy(pred: &[f64], target: &[f64], q: usize) -> Result<f64> {
    if pred.len() != target.len() || q == 0 || pred.len() % q != 0 {
        return Err(Error::DimensionMismatch(format!("prediction has {} values, target {}", pred.len(), target.len())));
    }
    let d = pred.len() / q;
    let total: f64 = pred.iter().zip(target).map(|(&p, &t)| if t == 0.0 { 0.0 } else { -t * p.max(LOG_CLAMP).ln() }).sum();
    Ok(total / d as f64)
}

/// One-hot `d × q` matrix for a sequence of node indices.
pub fn one_hot(targets: &[usize], q: usize) -> Vec<f64> {
    let mut out = vec![0.0; targets.len() * q];
    for (j, &t) in targets.iter().enumerate() {
        out[j * q + t] = 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_model_is_uniform() {
        let mut m = Mlp::new(6, &[5], Activation::Relu, 3, 4, &mut seeded(0));
        for l in &mut m.layers {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        let p = m.forward(&[1.0; 6]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn rows_sum_to_one() {
        let m = Mlp::new(8, &[7, 6], Activation::Relu, 4, 5, &mut seeded(3));
        let mut rng = seeded(4);
        for _ in 0..20 {
            let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = m.forward(&x).unwrap();
            for row in p.chunks(5) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_logit_saturates() {
        let mut logits = vec![0.0, 20.0, 0.0, 0.0];
        softmax_rows(&mut logits, 4, 1.0);
        assert!(logits[1] > 0.999);
    }

    #[test]
    fn cross_entropy_cases() {
        let t = one_hot(&[0, 2, 1], 3);
        assert_eq!(cross_entropy(&t, &t, 3).unwrap(), 0.0);
        let uniform = vec![1.0 / 3.0; 9];
        assert!((cross_entropy(&uniform, &t, 3).unwrap() - 3f64.ln()).abs() < 1e-12);
        // zero probability on the true class is clamped rather than infinite
        let wrong = one_hot(&[1, 0, 0], 3);
        let ce = cross_entropy(&wrong, &t, 3).unwrap();
        assert!((ce + LOG_CLAMP.ln()).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = Mlp::new(4, &[3], Activation::Relu, 2, 2, &mut seeded(0));
        assert!(matches!(m.forward(&[0.0; 5]), Err(Error::DimensionMismatch(_))));
        assert!(m.loss_and_gradients(&[0.0; 4], &[0, 2], 1).is_err());
    }

    #[test]
    fn validate_catches_bad_shapes() {
        let mut m = Mlp::new(4, &[3], Activation::Tanh, 2, 2, &mut seeded(0));
        assert!(m.validate().is_ok());
        m.layers[1].inputs = 5;
        assert!(m.validate().is_err());
    }
}
