//! Incrementally trained fully-connected softmax classifier over
//! embedding vectors.
//!
//! Hidden layers use leaky ReLU, the output layer is softmax with
//! categorical cross-entropy plus an L2 penalty on the weights. Updates
//! are Adam steps over shuffled minibatches; the model is never
//! reinitialized between stream steps.

use ndarray::{Array1, Array2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub num_classes: usize,
    pub learning_rate: f64,
    pub l2_coefficient: f64,
    pub minibatch_size: usize,
    pub epochs_per_step: usize,
    pub leaky_relu_slope: f64,
    pub seed: u64,
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config(
                "classifier input_dim must be positive".into(),
            ));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("classifier needs at least 2 classes".into()));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config("zero-width hidden layer".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_coefficient >= 0.0 && self.l2_coefficient.is_finite()) {
            return Err(Error::Config("l2 coefficient must be non-negative".into()));
        }
        if self.minibatch_size == 0 {
            return Err(Error::Config("minibatch size must be positive".into()));
        }
        if self.epochs_per_step == 0 {
            return Err(Error::Config("epochs per step must be positive".into()));
        }
        if !(self.leaky_relu_slope > 0.0 && self.leaky_relu_slope.is_finite()) {
            return Err(Error::Config("leaky ReLU slope must be positive".into()));
        }
        Ok(())
    }

    /// Layer widths from input through hidden layers to the K outputs.
    fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden_layers);
        sizes.push(self.num_classes);
        sizes
    }
}

/// Gradients for every parameter tensor, in layer order.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

#[derive(Debug, Clone)]
pub struct ClassifierState {
    config: ClassifierConfig,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    m_weights: Vec<Array2<f64>>,
    v_weights: Vec<Array2<f64>>,
    m_biases: Vec<Array1<f64>>,
    v_biases: Vec<Array1<f64>>,
    adam_step: u64,
    rng: ChaCha20Rng,
}

impl ClassifierState {
    /// He-Normal weights (`std = sqrt(2 / fan_in)`), zero biases, zero
    /// Adam moments. Deterministic for a given config seed.
    pub fn init(config: ClassifierConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let sizes = config.layer_sizes();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..(sizes.len() - 1) {
            let fan_in = sizes[l];
            let fan_out = sizes[l + 1];
            let dist =
                Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("std is positive and finite");
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| dist.sample(&mut rng));
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        let m_weights = weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let v_weights = weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let m_biases = biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect();
        let v_biases = biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect();
        Ok(Self {
            config,
            weights,
            biases,
            m_weights,
            v_weights,
            m_biases,
            v_biases,
            adam_step: 0,
            rng,
        })
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    /// All parameters as one flat vector (weights then bias, per layer).
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.weights.len() {
            out.extend(self.weights[l].iter());
            out.extend(self.biases[l].iter());
        }
        out
    }

    /// Overwrites all parameters from a flat vector produced by
    /// [`flatten_params`].
    pub fn set_params(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for l in 0..self.weights.len() {
            for w in self.weights[l].iter_mut() {
                *w = flat[pos];
                pos += 1;
            }
            for b in self.biases[l].iter_mut() {
                *b = flat[pos];
                pos += 1;
            }
        }
        assert_eq!(pos, flat.len(), "flat parameter vector has wrong length");
    }

    fn forward(&self, inputs: &Array2<f64>) -> ForwardPass {
        let num_layers = self.weights.len();
        let mut activations = Vec::with_capacity(num_layers + 1);
        let mut pre_activations = Vec::with_capacity(num_layers);
        activations.push(inputs.clone());
        for l in 0..num_layers {
            let z = activations[l].dot(&self.weights[l].t()) + &self.biases[l];
            let a = if l + 1 < num_layers {
                z.mapv(|v| {
                    if v > 0.0 {
                        v
                    } else {
                        self.config.leaky_relu_slope * v
                    }
                })
            } else {
                softmax_rows(&z)
            };
            pre_activations.push(z);
            activations.push(a);
        }
        ForwardPass {
            activations,
            pre_activations,
        }
    }

    /// Class probabilities and the argmax label (ties to the smallest
    /// class index). Labels are 1-based.
    pub fn predict(&self, embedding: &[f64]) -> Result<(usize, Vec<f64>)> {
        if embedding.len() != self.config.input_dim {
            return Err(Error::InputDimension {
                expected: self.config.input_dim,
                got: embedding.len(),
            });
        }
        let x = Array2::from_shape_vec((1, embedding.len()), embedding.to_vec())
            .expect("shape matches input length");
        let pass = self.forward(&x);
        let probs = pass
            .activations
            .last()
            .expect("at least one layer")
            .row(0)
            .to_vec();
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        Ok((best + 1, probs))
    }

    /// Mean cross-entropy plus L2 penalty, with gradients for every
    /// parameter. Labels are 1-based.
    pub fn loss_and_gradients(&self, batch: &[(Vec<f64>, usize)]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::EmptyStream);
        }
        let k = self.config.num_classes;
        for (e, y) in batch {
            if e.len() != self.config.input_dim {
                return Err(Error::InputDimension {
                    expected: self.config.input_dim,
                    got: e.len(),
                });
            }
            if *y < 1 || *y > k {
                return Err(Error::UnknownClass {
                    label: *y,
                    num_classes: k,
                });
            }
        }
        let b = batch.len();
        let mut x = Array2::zeros((b, self.config.input_dim));
        for (i, (e, _)) in batch.iter().enumerate() {
            for (j, &v) in e.iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        let pass = self.forward(&x);
        let probs = pass.activations.last().expect("output layer");

        let mut loss = 0.0;
        for (i, (_, y)) in batch.iter().enumerate() {
            // Floor avoids -inf on a collapsed softmax cell.
            loss -= probs[(i, y - 1)].max(1e-300).ln();
        }
        loss /= b as f64;
        let l2 = self.config.l2_coefficient;
        if l2 > 0.0 {
            loss += l2
                * self
                    .weights
                    .iter()
                    .map(|w| w.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>();
        }

        // Backward pass: d_z starts as (P - Y) / B at the softmax layer.
        let num_layers = self.weights.len();
        let mut d_z = probs.clone();
        for (i, (_, y)) in batch.iter().enumerate() {
            d_z[(i, y - 1)] -= 1.0;
        }
        d_z.mapv_inplace(|v| v / b as f64);

        let mut grad_w = vec![Array2::zeros((0, 0)); num_layers];
        let mut grad_b = vec![Array1::zeros(0); num_layers];
        for l in (0..num_layers).rev() {
            let mut gw = d_z.t().dot(&pass.activations[l]);
            if l2 > 0.0 {
                gw += &(2.0 * l2 * &self.weights[l]);
            }
            grad_w[l] = gw;
            grad_b[l] = d_z.sum_axis(Axis(0));
            if l > 0 {
                let d_a = d_z.dot(&self.weights[l]);
                let slope = self.config.leaky_relu_slope;
                d_z = d_a * pass.pre_activations[l - 1].mapv(|v| if v > 0.0 { 1.0 } else { slope });
            }
        }

        Ok((
            loss,
            Gradients {
                weights: grad_w,
                biases: grad_b,
            },
        ))
    }

    /// One incremental training step: `epochs_per_step` passes of shuffled
    /// minibatch Adam updates over the given set. Returns the mean loss
    /// across all minibatch updates.
    pub fn train_step(&mut self, training_set: &[(Vec<f64>, usize)], step: u64) -> Result<f64> {
        if training_set.is_empty() {
            return Err(Error::EmptyStream);
        }
        let mut losses = Vec::new();
        let batch_size = self.config.minibatch_size.min(training_set.len());
        for _ in 0..self.config.epochs_per_step {
            let mut order: Vec<usize> = (0..training_set.len()).collect();
            order.shuffle(&mut self.rng);
            for chunk in order.chunks(batch_size) {
                let batch: Vec<(Vec<f64>, usize)> =
                    chunk.iter().map(|&i| training_set[i].clone()).collect();
                let (loss, grads) = self.loss_and_gradients(&batch)?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { step, loss });
                }
                self.apply_adam(&grads);
                losses.push(loss);
            }
        }
        Ok(losses.iter().sum::<f64>() / losses.len() as f64)
    }

    fn apply_adam(&mut self, grads: &Gradients) {
        self.adam_step += 1;
        let t = self.adam_step as i32;
        let lr = self.config.learning_rate;
        let bias1 = 1.0 - ADAM_BETA1.powi(t);
        let bias2 = 1.0 - ADAM_BETA2.powi(t);
        for l in 0..self.weights.len() {
            adam_update(
                self.weights[l].iter_mut(),
                self.m_weights[l].iter_mut(),
                self.v_weights[l].iter_mut(),
                grads.weights[l].iter(),
                lr,
                bias1,
                bias2,
            );
            adam_update(
                self.biases[l].iter_mut(),
                self.m_biases[l].iter_mut(),
                self.v_biases[l].iter_mut(),
                grads.biases[l].iter(),
                lr,
                bias1,
                bias2,
            );
        }
    }
}

fn adam_update<'a>(
    params: impl Iterator<Item = &'a mut f64>,
    m: impl Iterator<Item = &'a mut f64>,
    v: impl Iterator<Item = &'a mut f64>,
    grads: impl Iterator<Item = &'a f64>,
    lr: f64,
    bias1: f64,
    bias2: f64,
) {
    for ((p, mv), (vv, &g)) in params.zip(m).zip(v.zip(grads)) {
        *mv = ADAM_BETA1 * *mv + (1.0 - ADAM_BETA1) * g;
        *vv = ADAM_BETA2 * *vv + (1.0 - ADAM_BETA2) * g * g;
        *p -= lr * (*mv / bias1) / ((*vv / bias2).sqrt() + ADAM_EPS);
    }
}

struct ForwardPass {
    activations: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
}

fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_chacha::ChaCha20Rng;

    fn config(input: usize, hidden: Vec<usize>, k: usize, seed: u64) -> ClassifierConfig {
        ClassifierConfig {
            input_dim: input,
            hidden_layers: hidden,
            num_classes: k,
            learning_rate: 0.001,
            l2_coefficient: 0.0001,
            minibatch_size: 128,
            epochs_per_step: 1,
            leaky_relu_slope: 0.01,
            seed,
        }
    }

    #[test]
    fn same_seed_gives_identical_states() {
        let a = ClassifierState::init(config(9, vec![128, 64], 3, 42)).unwrap();
        let b = ClassifierState::init(config(9, vec![128, 64], 3, 42)).unwrap();
        assert_eq!(a.flatten_params(), b.flatten_params());
    }

    #[test]
    fn layer_shapes_follow_config() {
        let state = ClassifierState::init(config(9, vec![128, 64], 3, 1)).unwrap();
        let shapes: Vec<(usize, usize)> = state
            .weights()
            .iter()
            .map(|w| (w.nrows(), w.ncols()))
            .collect();
        assert_eq!(shapes, vec![(128, 9), (64, 128), (3, 64)]);
        assert_eq!(state.biases()[2].len(), 3);
    }

    #[test]
    fn he_init_std_close_to_sqrt_two_over_fan_in() {
        // 9 -> 2048 gives 18k+ first-layer samples.
        let state = ClassifierState::init(config(9, vec![2048], 3, 5)).unwrap();
        let w = &state.weights()[0];
        let n = w.len() as f64;
        let mean: f64 = w.iter().sum::<f64>() / n;
        let var: f64 = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let expected = (2.0f64 / 9.0).sqrt();
        let got = var.sqrt();
        assert!(
            (got - expected).abs() / expected < 0.1,
            "std {got} deviates more than 10% from {expected}"
        );
    }

    #[test]
    fn zero_width_layer_rejected() {
        assert!(ClassifierState::init(config(9, vec![16, 0], 3, 1)).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        let state = ClassifierState::init(config(4, vec![8], 3, 3)).unwrap();
        let (_, probs) = state.predict(&[0.3, -1.2, 0.0, 2.5]).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let mut state = ClassifierState::init(config(4, vec![8], 3, 3)).unwrap();
        let zeros = vec![0.0; state.flatten_params().len()];
        state.set_params(&zeros);
        let (label, probs) = state.predict(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        for &p in &probs {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-9);
        }
        assert_eq!(label, 1, "ties break to the smallest class index");
    }

    #[test]
    fn softmax_invariant_to_logit_shift() {
        use ndarray::array;
        let z = array![[1.0, 2.0, 3.0]];
        let shifted = array![[101.0, 102.0, 103.0]];
        let a = softmax_rows(&z);
        let b = softmax_rows(&shifted);
        for j in 0..3 {
            assert_abs_diff_eq!(a[(0, j)], b[(0, j)], epsilon = 1e-9);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let state = ClassifierState::init(config(4, vec![8], 3, 3)).unwrap();
        assert!(state.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn uniform_prediction_loss_is_ln_k() {
        let mut state = ClassifierState::init(config(4, vec![8], 3, 3)).unwrap();
        let mut flat = state.flatten_params();
        flat.iter_mut().for_each(|v| *v = 0.0);
        state.set_params(&flat);
        // l2 is zero on zero weights, so loss is exactly ln 3.
        let (loss, _) = state
            .loss_and_gradients(&[(vec![1.0, 0.0, -1.0, 2.0], 2)])
            .unwrap();
        assert_abs_diff_eq!(loss, 3.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn perfect_prediction_loss_is_l2_only() {
        let mut state = ClassifierState::init(config(2, vec![], 2, 3)).unwrap();
        // Direct softmax layer; drive logits far apart.
        state.set_params(&[50.0, 0.0, -50.0, 0.0, 0.0, 0.0]);
        let l2_term: f64 = 0.0001 * (50.0f64 * 50.0 + 50.0 * 50.0);
        let (loss, _) = state.loss_and_gradients(&[(vec![1.0, 0.0], 1)]).unwrap();
        assert_abs_diff_eq!(loss, l2_term, epsilon = 1e-9);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_unchanged() {
        let mut cfg = config(4, vec![8], 3, 3);
        cfg.learning_rate = 0.0;
        cfg.l2_coefficient = 0.0;
        let mut state = ClassifierState::init(cfg).unwrap();
        let before = state.flatten_params();
        let loss = state
            .train_step(&[(vec![1.0, 0.0, 0.0, 0.0], 1)], 1)
            .unwrap();
        assert!(loss.is_finite());
        assert_eq!(state.flatten_params(), before);
    }

    #[test]
    fn singleton_training_converges() {
        let mut cfg = config(4, vec![8], 3, 7);
        cfg.learning_rate = 0.01;
        let mut state = ClassifierState::init(cfg).unwrap();
        let example = (vec![0.5, -0.3, 1.0, 0.2], 2usize);
        let mut final_loss = f64::INFINITY;
        for step in 0..500 {
            final_loss = state
                .train_step(std::slice::from_ref(&example), step)
                .unwrap();
            if final_loss < 0.01 {
                break;
            }
        }
        assert!(final_loss < 0.01, "loss {final_loss} after 500 steps");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut max_rel = 0.0f64;
        for draw in 0..100u64 {
            let mut cfg = config(9, vec![4], 3, 100 + draw);
            cfg.l2_coefficient = if draw % 2 == 0 { 0.0001 } else { 0.0 };
            let mut state = ClassifierState::init(cfg).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(500 + draw);
            let batch: Vec<(Vec<f64>, usize)> = (0..3)
                .map(|_| {
                    let e: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
                    (e, rng.random_range(1..=3usize))
                })
                .collect();
            let (_, grads) = state.loss_and_gradients(&batch).unwrap();
            let mut flat_grads: Vec<f64> = Vec::new();
            for l in 0..grads.weights.len() {
                flat_grads.extend(grads.weights[l].iter());
                flat_grads.extend(grads.biases[l].iter());
            }
            let params = state.flatten_params();
            let h = 1e-5;
            for (i, &g) in flat_grads.iter().enumerate() {
                let mut plus = params.clone();
                plus[i] += h;
                state.set_params(&plus);
                let (lp, _) = state.loss_and_gradients(&batch).unwrap();
                let mut minus = params.clone();
                minus[i] -= h;
                state.set_params(&minus);
                let (lm, _) = state.loss_and_gradients(&batch).unwrap();
                state.set_params(&params);
                let fd = (lp - lm) / (2.0 * h);
                let denom = g.abs().max(fd.abs()).max(1e-4);
                max_rel = max_rel.max((g - fd).abs() / denom);
            }
        }
        assert!(max_rel <= 1e-4, "max relative gradient error {max_rel}");
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let make = || {
            let mut state = ClassifierState::init(config(4, vec![8], 3, 11)).unwrap();
            let set: Vec<(Vec<f64>, usize)> = (0..10)
                .map(|i| (vec![i as f64, 1.0, -0.5, 0.25 * i as f64], (i % 3) + 1))
                .collect();
            for step in 0..20 {
                state.train_step(&set, step).unwrap();
            }
            state.flatten_params()
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn train_step_never_reinitializes() {
        let mut state = ClassifierState::init(config(4, vec![8], 3, 11)).unwrap();
        let set = vec![(vec![1.0, 0.0, 0.0, 0.0], 1usize)];
        let mut prev = state.flatten_params();
        for step in 0..50 {
            state.train_step(&set, step).unwrap();
            let now = state.flatten_params();
            let dist: f64 = prev
                .iter()
                .zip(&now)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            // An Adam step moves each parameter by at most ~lr, so the
            // whole vector moves a bounded distance per step.
            let bound = 2.0 * 0.001 * (prev.len() as f64).sqrt();
            assert!(
                dist <= bound,
                "jump of {dist} at step {step} exceeds {bound}"
            );
            prev = now;
        }
    }
}
