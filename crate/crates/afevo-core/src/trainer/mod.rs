//! Fitness evaluation: a from-scratch MLP classifier trained with plain
//! SGD and backpropagation, using a candidate genome as the hidden-layer
//! activation function.
//!
//! The output layer is a softmax head with cross-entropy loss; the evolved
//! activation is applied to hidden pre-activations only. Weights use
//! He-style fan-in initialization from a genome-independent seed, so every
//! genome in a run starts from identical weights and differences in
//! fitness are attributable to the activation function alone. Mini-batch
//! shuffling is driven by a per-genome seed supplied by the caller.
//!
//! Any non-finite activation value or derivative, loss, or weight aborts
//! the training run immediately: the genome is reported invalid and scores
//! fitness 0. Nothing is clamped.

mod dataset;

pub use dataset::{load_csv, make_synthetic, DataError, Dataset, SyntheticKind};

use serde::{Deserialize, Serialize};

use crate::engine::Evaluator;
use crate::genome::Genome;
use crate::rng::{hash64, RngStream};

/// Hyper-parameters of the fitness classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub init_seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: vec![16, 16],
            epochs: 200,
            learning_rate: 0.05,
            batch_size: 32,
            init_seed: 42,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err("hidden layer widths must be >= 1".into());
        }
        if self.epochs == 0 {
            return Err("epochs must be >= 1".into());
        }
        if self.batch_size == 0 {
            return Err("batch size must be >= 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err("learning rate must be a positive finite number".into());
        }
        Ok(())
    }
}

/// Outcome of training one genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub final_loss: f64,
    pub valid: bool,
    pub failure_reason: Option<String>,
}

impl FitnessReport {
    fn invalid(reason: String) -> FitnessReport {
        FitnessReport {
            train_accuracy: 0.0,
            test_accuracy: 0.0,
            final_loss: 0.0,
            valid: false,
            failure_reason: Some(reason),
        }
    }
}

/// One dense layer, weights row-major `[out × in]`.
#[derive(Debug, Clone)]
struct Layer {
    w: Vec<f64>,
    b: Vec<f64>,
    in_dim: usize,
    out_dim: usize,
}

impl Layer {
    fn new(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Layer {
        let std = (2.0 / in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| std * rng.next_normal()).collect();
        Layer {
            w,
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
        }
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let mut z = self.b[o];
            for (wi, xi) in row.iter().zip(input) {
                z += wi * xi;
            }
            out.push(z);
        }
    }
}

/// A small multilayer perceptron with an evolved hidden activation.
#[derive(Debug, Clone)]
pub struct Mlp {
    hidden: Vec<Layer>,
    output: Layer,
}

/// Per-sample forward pass scratch, reused across the batch.
#[derive(Default)]
struct Scratch {
    activations: Vec<Vec<f64>>, // post-activation per hidden layer
    slopes: Vec<Vec<f64>>,      // activation derivative at each unit
    zs: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
}

impl Mlp {
    pub fn new(dim: usize, num_classes: usize, cfg: &MlpConfig) -> Mlp {
        let mut rng = RngStream::new(cfg.init_seed);
        let mut hidden = Vec::with_capacity(cfg.hidden_layers.len());
        let mut in_dim = dim;
        for &width in &cfg.hidden_layers {
            hidden.push(Layer::new(in_dim, width, &mut rng));
            in_dim = width;
        }
        let output = Layer::new(in_dim, num_classes, &mut rng);
        Mlp { hidden, output }
    }

    /// Flattened parameters: hidden layers in order (weights, then bias),
    /// then the output layer.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for layer in self.hidden.iter().chain(std::iter::once(&self.output)) {
            p.extend_from_slice(&layer.w);
            p.extend_from_slice(&layer.b);
        }
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let mut at = 0;
        for layer in self.hidden.iter_mut().chain(std::iter::once(&mut self.output)) {
            let wn = layer.w.len();
            layer.w.copy_from_slice(&params[at..at + wn]);
            at += wn;
            let bn = layer.b.len();
            layer.b.copy_from_slice(&params[at..at + bn]);
            at += bn;
        }
        assert_eq!(at, params.len());
    }

    /// Forward pass for one sample. Returns `None` on a non-finite
    /// activation value or derivative.
    fn forward(&self, genome: &Genome, x: &[f64], scratch: &mut Scratch) -> Option<()> {
        scratch.activations.resize_with(self.hidden.len(), Vec::new);
        scratch.slopes.resize_with(self.hidden.len(), Vec::new);
        for (l, layer) in self.hidden.iter().enumerate() {
            let (done, rest) = scratch.activations.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            layer.forward_into(input, &mut scratch.zs);
            let act = &mut rest[0];
            let slope = &mut scratch.slopes[l];
            act.clear();
            slope.clear();
            for &z in &scratch.zs {
                let dual = genome.eval_dual(z);
                if !dual.is_finite() {
                    return None;
                }
                act.push(dual.value);
                slope.push(dual.deriv);
            }
        }
        let input: &[f64] = match scratch.activations.last() {
            Some(last) => last,
            None => x,
        };
        self.output.forward_into(input, &mut scratch.logits);
        Some(())
    }

    /// Softmax + cross-entropy on already-computed logits.
    fn loss_from_logits(scratch: &mut Scratch, label: usize) -> f64 {
        let max = scratch.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        scratch.probs.clear();
        for &z in &scratch.logits {
            let e = (z - max).exp();
            scratch.probs.push(e);
            sum += e;
        }
        for p in scratch.probs.iter_mut() {
            *p /= sum;
        }
        sum.ln() - (scratch.logits[label] - max)
    }

    /// Mean loss and flattened gradients over a batch.
    ///
    /// Returns `None` if any activation or the loss goes non-finite.
    pub fn batch_gradients(
        &self,
        genome: &Genome,
        data: &Dataset,
        batch: &[usize],
        grads: &mut Vec<f64>,
    ) -> Option<f64> {
        grads.clear();
        grads.resize(self.param_count(), 0.0);
        let mut scratch = Scratch::default();
        let inv = 1.0 / batch.len() as f64;
        let mut total_loss = 0.0;

        for &i in batch {
            let x = data.feature(i);
            let y = data.label(i);
            self.forward(genome, x, &mut scratch)?;
            let loss = Self::loss_from_logits(&mut scratch, y);
            if !loss.is_finite() {
                return None;
            }
            total_loss += loss * inv;
            self.backward(x, y, inv, &scratch, grads);
        }
        Some(total_loss)
    }

    fn param_count(&self) -> usize {
        self.hidden
            .iter()
            .chain(std::iter::once(&self.output))
            .map(|l| l.w.len() + l.b.len())
            .sum()
    }

    /// Accumulate one sample's gradients (scaled by `scale`) into `grads`.
    fn backward(&self, x: &[f64], label: usize, scale: f64, scratch: &Scratch, grads: &mut [f64]) {
        let layers = self.hidden.len();

        // dL/dlogits = softmax − one-hot
        let delta_out: Vec<f64> = scratch
            .probs
            .iter()
            .enumerate()
            .map(|(c, &p)| if c == label { p - 1.0 } else { p })
            .collect();

        // offsets of each layer's block in the flat gradient vector
        let mut offsets = Vec::with_capacity(layers + 1);
        let mut at = 0;
        for layer in self.hidden.iter().chain(std::iter::once(&self.output)) {
            offsets.push(at);
            at += layer.w.len() + layer.b.len();
        }

        // output layer gradients
        {
            let input: &[f64] = if layers == 0 { x } else { &scratch.activations[layers - 1] };
            let off = offsets[layers];
            for o in 0..self.output.out_dim {
                let g = delta_out[o] * scale;
                let row = off + o * self.output.in_dim;
                for (j, &xi) in input.iter().enumerate() {
                    grads[row + j] += g * xi;
                }
                grads[off + self.output.w.len() + o] += g;
            }
        }

        // propagate through hidden layers
        let mut delta = delta_out;
        let mut delta_layer = &self.output;
        for l in (0..layers).rev() {
            // error at layer l's outputs: Wᵀ · delta, times activation slope
            let mut err = vec![0.0; delta_layer.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                let row = &delta_layer.w[o * delta_layer.in_dim..(o + 1) * delta_layer.in_dim];
                for (j, &wij) in row.iter().enumerate() {
                    err[j] += wij * d;
                }
            }
            let slopes = &scratch.slopes[l];
            let new_delta: Vec<f64> = err.iter().zip(slopes).map(|(e, s)| e * s).collect();

            let layer = &self.hidden[l];
            let input: &[f64] = if l == 0 { x } else { &scratch.activations[l - 1] };
            let off = offsets[l];
            for o in 0..layer.out_dim {
                let g = new_delta[o] * scale;
                let row = off + o * layer.in_dim;
                for (j, &xi) in input.iter().enumerate() {
                    grads[row + j] += g * xi;
                }
                grads[off + layer.w.len() + o] += g;
            }

            delta = new_delta;
            delta_layer = layer;
        }
    }

    fn sgd_step(&mut self, grads: &[f64], lr: f64) -> bool {
        let mut at = 0;
        let mut finite = true;
        for layer in self.hidden.iter_mut().chain(std::iter::once(&mut self.output)) {
            for w in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                *w -= lr * grads[at];
                finite &= w.is_finite();
                at += 1;
            }
        }
        finite
    }

    /// Predicted class for one sample; ties break to the lowest index.
    pub fn predict(&self, genome: &Genome, x: &[f64]) -> Option<usize> {
        let mut scratch = Scratch::default();
        self.forward(genome, x, &mut scratch)?;
        let mut best = 0;
        for (c, &z) in scratch.logits.iter().enumerate() {
            if !z.is_finite() {
                return None;
            }
            if z > scratch.logits[best] {
                best = c;
            }
        }
        Some(best)
    }
}

/// Train an MLP with `genome` as its hidden activation and score it.
///
/// `shuffle_seed` drives the epoch shuffles; init comes from
/// `cfg.init_seed` so all genomes start from the same weights.
pub fn train_and_score(
    genome: &Genome,
    data: &Dataset,
    cfg: &MlpConfig,
    shuffle_seed: u64,
) -> FitnessReport {
    let mut mlp = Mlp::new(data.dim, data.num_classes, cfg);
    let mut rng = RngStream::new(shuffle_seed);
    let mut order = data.train_idx.clone();
    let mut grads = Vec::new();

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let loss = match mlp.batch_gradients(genome, data, batch, &mut grads) {
                Some(loss) => loss,
                None => {
                    return FitnessReport::invalid(format!(
                        "non-finite activation or loss in epoch {epoch}"
                    ))
                }
            };
            debug_assert!(loss.is_finite());
            if !mlp.sgd_step(&grads, cfg.learning_rate) {
                return FitnessReport::invalid(format!("non-finite weight after epoch {epoch} update"));
            }
        }
    }

    let accuracy_over = |idx: &[usize]| -> Option<f64> {
        let mut correct = 0usize;
        for &i in idx {
            if mlp.predict(genome, data.feature(i))? == data.label(i) {
                correct += 1;
            }
        }
        Some(correct as f64 / idx.len() as f64)
    };

    let train_accuracy = accuracy_over(&data.train_idx);
    let test_accuracy = accuracy_over(&data.test_idx);
    let final_loss = mlp.batch_gradients(genome, data, &data.train_idx, &mut grads);
    match (train_accuracy, test_accuracy, final_loss) {
        (Some(train_accuracy), Some(test_accuracy), Some(final_loss)) => FitnessReport {
            train_accuracy,
            test_accuracy,
            final_loss,
            valid: true,
            failure_reason: None,
        },
        _ => FitnessReport::invalid("non-finite activation during final scoring".into()),
    }
}

/// Derive the per-genome training seed and evaluate. This is the single
/// path shared by the engine, the CLI, and the tests, so cached and fresh
/// evaluations of the same genome coincide.
pub fn evaluate_genome(
    genome: &Genome,
    data: &Dataset,
    cfg: &MlpConfig,
    run_seed: u64,
) -> FitnessReport {
    train_and_score(genome, data, cfg, hash64(run_seed, &genome.key()))
}

/// [`Evaluator`] backed by the MLP trainer.
pub struct TrainerEvaluator<'a> {
    pub data: &'a Dataset,
    pub cfg: MlpConfig,
}

impl Evaluator for TrainerEvaluator<'_> {
    fn evaluate(&self, genome: &Genome, train_seed: u64) -> FitnessReport {
        train_and_score(genome, self.data, &self.cfg, train_seed)
    }
}
