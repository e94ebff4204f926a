//! Minimal fully-connected network with explicit forward/backward passes.
//!
//! Parameters and activations are f32; every dot product accumulates in f64
//! (see [`dot`]). The same code serves the Q-network and the digit
//! classifier: hidden layers are rectified, the output layer is linear and
//! callers apply softmax themselves when they want probabilities.
//!
//! Shape mismatches are programming errors and panic; fallible construction
//! and file I/O return [`NetError`].

mod checkpoint;

pub use checkpoint::{load, save};

use rand::Rng;
use rand::SeedableRng;

use crate::rng::Rng64;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("need at least two layer sizes, got {0}")]
    TooFewSizes(usize),
    #[error("layer sizes must be positive")]
    NonPositiveSize,
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format version {found:?}, expected \"NNV1\"")]
    Version { found: String },
    #[error("checkpoint parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Clone, Debug)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    /// out×in, row-major: row o holds the fan-in weights of output unit o.
    weights: Vec<f32>,
    bias: Vec<f32>,
    activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    layers: Vec<Layer>,
}

/// Deep copy of all parameters; the target-network side of Q-learning.
#[derive(Clone, Debug)]
pub struct ParameterSnapshot {
    net: Network,
}

impl ParameterSnapshot {
    /// Read-only view for inference with the frozen parameters.
    pub fn as_network(&self) -> &Network {
        &self.net
    }
}

/// Restore a snapshot into an independent Network.
pub fn restore_target(snapshot: &ParameterSnapshot) -> Network {
    snapshot.net.clone()
}

/// Initialize with uniform weights in ±√(6/fan_in) and zero biases; hidden
/// layers rectified, final layer linear.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<Network, NetError> {
    if layer_sizes.len() < 2 {
        return Err(NetError::TooFewSizes(layer_sizes.len()));
    }
    if layer_sizes.contains(&0) {
        return Err(NetError::NonPositiveSize);
    }
    let mut rng = Rng64::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
    for (l, pair) in layer_sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = (6.0 / fan_in as f64).sqrt();
        let weights = (0..fan_in * fan_out)
            .map(|_| rng.gen_range(-bound..=bound) as f32)
            .collect();
        layers.push(Layer {
            in_dim: fan_in,
            out_dim: fan_out,
            weights,
            bias: vec![0.0; fan_out],
            activation: if l + 2 == layer_sizes.len() {
                Activation::Identity
            } else {
                Activation::Relu
            },
        });
    }
    Ok(Network { layers })
}

/// Activations recorded by a forward pass: `acts[0]` is the input, `acts[l+1]`
/// the (post-activation) output of layer l. For ReLU, the post-activation
/// sign carries the same information as the pre-activation sign, which is all
/// backward needs.
#[derive(Clone, Debug, Default)]
pub struct ForwardCache {
    acts: Vec<Vec<f32>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f32] {
        self.acts.last().expect("cache from a forward pass")
    }
}

/// Per-layer parameter gradients, shape-matched to a Network.
#[derive(Clone, Debug)]
pub struct Gradients {
    /// (d_weights, d_bias) per layer.
    layers: Vec<(Vec<f32>, Vec<f32>)>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Gradients {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn layer(&self, l: usize) -> (&[f32], &[f32]) {
        let (w, b) = &self.layers[l];
        (w, b)
    }

    pub fn global_norm(&self) -> f64 {
        let mut sum = 0.0f64;
        for (w, b) in &self.layers {
            for &v in w.iter().chain(b.iter()) {
                sum += v as f64 * v as f64;
            }
        }
        sum.sqrt()
    }

    /// Scale down so the global norm is at most `max_norm`.
    pub fn clip_to_norm(&mut self, max_norm: f64) {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            self.scale((max_norm / norm) as f32);
        }
    }

    pub fn scale(&mut self, s: f32) {
        for (w, b) in &mut self.layers {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v *= s;
            }
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.layers.len(), other.layers.len(), "gradient shape");
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            assert_eq!(w.len(), ow.len(), "gradient shape");
            for (x, y) in w.iter_mut().zip(ow) {
                *x += y;
            }
            for (x, y) in b.iter_mut().zip(ob) {
                *x += y;
            }
        }
    }
}

/// f32 dot product with f64 accumulation. Eight independent accumulators
/// combined in a fixed order: deterministic, and the independent chains let
/// the loop vectorize instead of serializing on one f64 add.
#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += xa[k] as f64 * xb[k] as f64;
        }
    }
    let mut tail = 0.0f64;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += *x as f64 * *y as f64;
    }
    (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) + tail
}

impl Network {
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].in_dim];
        sizes.extend(self.layers.iter().map(|l| l.out_dim));
        sizes
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn snapshot(&self) -> ParameterSnapshot {
        ParameterSnapshot { net: self.clone() }
    }

    /// Forward pass returning the output and the cache backward needs.
    pub fn forward(&self, input: &[f32]) -> (Vec<f32>, ForwardCache) {
        let mut cache = ForwardCache::default();
        self.forward_into(input, &mut cache);
        (cache.output().to_vec(), cache)
    }

    /// Forward pass reusing `cache`'s buffers; returns the output slice.
    pub fn forward_into<'c>(&self, input: &[f32], cache: &'c mut ForwardCache) -> &'c [f32] {
        assert_eq!(input.len(), self.in_dim(), "input length");
        cache.acts.resize(self.layers.len() + 1, Vec::new());
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(input);
        for (l, layer) in self.layers.iter().enumerate() {
            let (prev, rest) = cache.acts.split_at_mut(l + 1);
            let x = prev[l].as_slice();
            let out = &mut rest[0];
            out.resize(layer.out_dim, 0.0);
            for (o, out_o) in out.iter_mut().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let z = dot(row, x) + layer.bias[o] as f64;
                *out_o = match layer.activation {
                    Activation::Relu => {
                        if z > 0.0 {
                            z as f32
                        } else {
                            0.0
                        }
                    }
                    Activation::Identity => z as f32,
                };
            }
        }
        cache.output()
    }

    /// Gradients of `output · output_gradient` with respect to all
    /// parameters. Allocates; the training loops use [`Network::backward_into`].
    pub fn backward(&self, cache: &ForwardCache, output_gradient: &[f32]) -> Gradients {
        let mut grads = Gradients::zeros_like(self);
        let mut scratch = BackwardScratch::default();
        self.backward_into(cache, output_gradient, &mut grads, true, &mut scratch);
        grads
    }

    /// Backpropagate into `grads`; adds when `accumulate`, overwrites
    /// otherwise (so batch loops need no zeroing pass).
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        output_gradient: &[f32],
        grads: &mut Gradients,
        accumulate: bool,
        scratch: &mut BackwardScratch,
    ) {
        assert_eq!(cache.acts.len(), self.layers.len() + 1, "cache shape");
        assert_eq!(output_gradient.len(), self.out_dim(), "output gradient");
        assert_eq!(grads.layers.len(), self.layers.len(), "gradient shape");

        scratch.delta.clear();
        scratch.delta.extend_from_slice(output_gradient);

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let act_out = &cache.acts[l + 1];
            let act_in = &cache.acts[l];

            // ReLU gate: units that output zero pass no gradient.
            if layer.activation == Activation::Relu {
                for (d, &a) in scratch.delta.iter_mut().zip(act_out) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }

            let (dw, db) = &mut grads.layers[l];
            if accumulate {
                for o in 0..layer.out_dim {
                    let d = scratch.delta[o];
                    db[o] += d;
                    if d != 0.0 {
                        let row = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (g, &x) in row.iter_mut().zip(act_in) {
                            *g += d * x;
                        }
                    }
                }
            } else {
                for o in 0..layer.out_dim {
                    let d = scratch.delta[o];
                    db[o] = d;
                    let row = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    if d != 0.0 {
                        for (g, &x) in row.iter_mut().zip(act_in) {
                            *g = d * x;
                        }
                    } else {
                        row.fill(0.0);
                    }
                }
            }

            if l > 0 {
                // delta_{l-1}[i] = Σ_o W[o][i] · delta[o], accumulated in f64.
                scratch.upstream.clear();
                scratch.upstream.resize(layer.in_dim, 0.0f64);
                for o in 0..layer.out_dim {
                    let d = scratch.delta[o] as f64;
                    if d != 0.0 {
                        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for (u, &w) in scratch.upstream.iter_mut().zip(row) {
                            *u += w as f64 * d;
                        }
                    }
                }
                scratch.delta.clear();
                scratch.delta.extend(scratch.upstream.iter().map(|&u| u as f32));
            }
        }
    }

    /// Plain SGD: w ← w − lr·g.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f32) {
        assert_eq!(grads.layers.len(), self.layers.len(), "gradient shape");
        for (layer, (dw, db)) in self.layers.iter_mut().zip(&grads.layers) {
            assert_eq!(layer.weights.len(), dw.len(), "gradient shape");
            for (w, &g) in layer.weights.iter_mut().zip(dw) {
                *w -= learning_rate * g;
            }
            for (b, &g) in layer.bias.iter_mut().zip(db) {
                *b -= learning_rate * g;
            }
        }
    }

    /// Build directly from parts (checkpoint loading, tests).
    pub(crate) fn from_layers(layers: Vec<Layer>) -> Network {
        assert!(!layers.is_empty());
        for pair in layers.windows(2) {
            assert_eq!(pair[0].out_dim, pair[1].in_dim, "layer dims must chain");
        }
        Network { layers }
    }

    pub(crate) fn make_layer(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
        activation: Activation,
    ) -> Layer {
        assert_eq!(weights.len(), in_dim * out_dim);
        assert_eq!(bias.len(), out_dim);
        Layer {
            in_dim,
            out_dim,
            weights,
            bias,
            activation,
        }
    }

    /// Test/training hook for direct parameter edits.
    pub fn layer_params_mut(&mut self, l: usize) -> (&mut [f32], &mut [f32]) {
        let layer = &mut self.layers[l];
        (&mut layer.weights, &mut layer.bias)
    }
}

/// Reusable backward-pass buffers.
#[derive(Clone, Debug, Default)]
pub struct BackwardScratch {
    delta: Vec<f32>,
    upstream: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    let mut exps: Vec<f32> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f32 = exps.iter().sum();
    for e in &mut exps {
        *e /= sum;
    }
    exps
}
