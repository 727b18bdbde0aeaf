use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Gradients, Mlp};
use super::TrainingPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Hidden layer widths; `None` means two layers of width `d`.
    pub hidden: Option<Vec<usize>>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    /// Fraction of pairs used for training.
    pub split: f64,
    /// `None` trains on the whole training set at once.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            hidden: None,
            activation: Activation::Relu,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 500,
            split: 0.7,
            batch_size: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if !(self.split > 0.0 && self.split <= 1.0) {
            return bad(format!("split must lie in (0, 1], got {}", self.split));
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be positive".into());
        }
        if self.activation == Activation::Softmax {
            return bad("softmax cannot be used as a hidden activation".into());
        }
        if self.hidden.as_ref().is_some_and(|h| h.contains(&0)) {
            return bad("hidden layers need positive width".into());
        }
        Ok(())
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(model: &Mlp, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Adam {
        let zeros = Gradients {
            weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        };
        Adam { lr, beta1, beta2, epsilon, step: 0, m: zeros.clone(), v: zeros }
    }

    pub fn update(&mut self, model: &mut Mlp, grads: &Gradients) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        let apply = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };
        for (l, layer) in model.layers.iter_mut().enumerate() {
            apply(&mut layer.weights, &grads.weights[l], &mut self.m.weights[l], &mut self.v.weights[l]);
            apply(&mut layer.bias, &grads.bias[l], &mut self.m.bias[l], &mut self.v.bias[l]);
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: Mlp,
    /// Training loss of each epoch, measured during that epoch's passes.
    pub train_loss: Vec<f64>,
    /// Held-out loss after each epoch; empty when nothing is held out.
    pub eval_loss: Vec<f64>,
    /// Training loss of the final parameters.
    pub final_train_loss: f64,
    pub train_indices: Vec<usize>,
    pub eval_indices: Vec<usize>,
}

struct Batch {
    inputs: Vec<f64>,
    targets: Vec<usize>,
    len: usize,
}

fn gather(pairs: &[TrainingPair], indices: &[usize]) -> Batch {
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for &i in indices {
        inputs.extend_from_slice(&pairs[i].input);
        targets.extend_from_slice(&pairs[i].target);
    }
    Batch { inputs, targets, len: indices.len() }
}

fn split_indices<R: Rng + ?Sized>(n: usize, split: f64, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut n_train = ((split * n as f64).round() as usize).clamp(1, n);
    if n_train == n && split < 1.0 && n > 1 {
        n_train = n - 1;
    }
    let eval = order.split_off(n_train);
    (order, eval)
}

fn finite(loss: f64, epoch: usize, what: &str) -> Result<f64> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::NonFiniteLoss { epoch, detail: format!("{what} loss is {loss}") })
    }
}

/// Fits a fresh network to `pairs` with cross-entropy and Adam.
///
/// All randomness (initialisation, split, batch order) comes from `rng`.
pub fn train<R: Rng + ?Sized>(pairs: &[TrainingPair], q: usize, config: &TrainConfig, rng: &mut R) -> Result<TrainReport> {
    config.validate()?;
    let first = pairs.first().ok_or_else(|| Error::InvalidConfig("no training pairs".into()))?;
    let input_dim = first.input.len();
    let d = first.target.len();
    if input_dim == 0 || d == 0 || q == 0 {
        return Err(Error::InvalidConfig("training pairs must have non-empty inputs and targets".into()));
    }
    if pairs.iter().any(|p| p.input.len() != input_dim || p.target.len() != d) {
        return Err(Error::DimensionMismatch("training pairs differ in shape".into()));
    }
    let hidden = config.hidden.clone().unwrap_or_else(|| vec![d, d]);
    let mut model = Mlp::new(input_dim, &hidden, config.activation, d, q, rng);
    let (train_indices, eval_indices) = split_indices(pairs.len(), config.split, rng);
    let eval = gather(pairs, &eval_indices);
    let mut adam = Adam::new(&model, config.learning_rate, config.beta1, config.beta2, config.epsilon);
    let batch_size = config.batch_size.unwrap_or(train_indices.len()).min(train_indices.len());
    let full = (batch_size == train_indices.len()).then(|| gather(pairs, &train_indices));

    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut eval_loss = Vec::with_capacity(config.epochs);
    let mut order = train_indices.clone();
    for epoch in 0..config.epochs {
        let mut weighted = 0.0;
        if let Some(batch) = &full {
            let (loss, grads) = model.loss_and_gradients(&batch.inputs, &batch.targets, batch.len)?;
            weighted = finite(loss, epoch, "training")?;
            adam.update(&mut model, &grads);
        } else {
            order.shuffle(rng);
            for chunk in order.chunks(batch_size) {
                let batch = gather(pairs, chunk);
                let (loss, grads) = model.loss_and_gradients(&batch.inputs, &batch.targets, batch.len)?;
                weighted += finite(loss, epoch, "training")? * batch.len as f64;
                adam.update(&mut model, &grads);
            }
            weighted /= order.len() as f64;
        }
        train_loss.push(weighted);
        if eval.len > 0 {
            let loss = model.batch_loss(&eval.inputs, &eval.targets, eval.len)?;
            eval_loss.push(finite(loss, epoch, "held-out")?);
        }
    }
    let all = gather(pairs, &train_indices);
    let final_train_loss = finite(model.batch_loss(&all.inputs, &all.targets, all.len)?, config.epochs, "training")?;
    Ok(TrainReport { model, train_loss, eval_loss, final_train_loss, train_indices, eval_indices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn pairs(n: usize, input: usize, d: usize, q: usize, seed: u64) -> Vec<TrainingPair> {
        let mut rng = seeded(seed);
        (0..n)
            .map(|_| TrainingPair {
                input: (0..input).map(|_| f64::from(rng.gen_range(0..2u8))).collect(),
                target: (0..d).map(|_| rng.gen_range(0..q)).collect(),
            })
            .collect()
    }

    #[test]
    fn split_sizes() {
        let (t, e) = split_indices(440, 0.7, &mut seeded(0));
        assert_eq!((t.len(), e.len()), (308, 132));
        let (t, e) = split_indices(2, 0.7, &mut seeded(0));
        assert_eq!((t.len(), e.len()), (1, 1));
        let (t, e) = split_indices(5, 1.0, &mut seeded(0));
        assert_eq!((t.len(), e.len()), (5, 0));
    }

    #[test]
    fn loss_decreases_and_is_deterministic() {
        let data = pairs(12, 10, 4, 3, 1);
        let config = TrainConfig { epochs: 60, learning_rate: 1e-2, ..TrainConfig::default() };
        let a = train(&data, 3, &config, &mut seeded(9)).unwrap();
        let b = train(&data, 3, &config, &mut seeded(9)).unwrap();
        assert_eq!(a.train_loss, b.train_loss);
        assert_eq!(a.model, b.model);
        assert!(a.final_train_loss < a.train_loss[0]);
        assert_eq!(a.eval_loss.len(), 60);
    }

    #[test]
    fn minibatches_cover_training_set() {
        let data = pairs(10, 6, 3, 4, 2);
        let config = TrainConfig { epochs: 5, batch_size: Some(3), ..TrainConfig::default() };
        let r = train(&data, 4, &config, &mut seeded(3)).unwrap();
        assert_eq!(r.train_loss.len(), 5);
        assert_eq!(r.train_indices.len() + r.eval_indices.len(), 10);
    }

    #[test]
    fn bad_config_rejected() {
        let data = pairs(4, 3, 2, 2, 0);
        let config = TrainConfig { learning_rate: -1.0, ..TrainConfig::default() };
        assert!(train(&data, 2, &config, &mut seeded(0)).is_err());
        assert!(train(&[], 2, &TrainConfig::default(), &mut seeded(0)).is_err());
    }

    #[test]
    fn non_finite_loss_aborts() {
        let mut data = pairs(4, 3, 2, 2, 0);
        data[0].input[1] = f64::NAN;
        let config = TrainConfig { split: 1.0, ..TrainConfig::default() };
        assert!(matches!(train(&data, 2, &config, &mut seeded(0)), Err(Error::NonFiniteLoss { epoch: 0, .. })));
    }
}
