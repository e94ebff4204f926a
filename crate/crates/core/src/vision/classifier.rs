//! Digit-tile classifier: 1024-500-12 network trained with softmax
//! cross-entropy SGD on per-image normalized pixels.

use rand::seq::SliceRandom;

use super::dataset::LabeledTile;
use super::image::{Image, TILE_PIXELS};
use crate::nn::{init_network, softmax, BackwardScratch, ForwardCache, Gradients, Network};
use crate::rng::{domain, stream, stream_seed};

pub const TILE_CLASSES: usize = 12;
pub const CLASSIFIER_SIZES: [usize; 3] = [TILE_PIXELS, 500, TILE_CLASSES];

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f32,
    /// Learning-rate multiplier applied after each epoch.
    pub lr_decay: f32,
}

impl Default for TrainOptions {
    fn default() -> TrainOptions {
        TrainOptions {
            epochs: 10,
            batch_size: 32,
            learning_rate: 0.05,
            lr_decay: 0.85,
        }
    }
}

/// Zero-mean, unit-variance pixel normalization; constant tiles map to
/// all zeros. This is the only preprocessing the network sees.
pub fn normalize_tile(tile: &Image, out: &mut [f32]) {
    assert_eq!(tile.pixels().len(), out.len(), "tile size");
    let n = out.len() as f64;
    let mean = tile.pixels().iter().map(|&p| p as f64).sum::<f64>() / n;
    let var = tile
        .pixels()
        .iter()
        .map(|&p| (p as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    let std = var.sqrt();
    if std < 1e-6 {
        out.fill(0.0);
        return;
    }
    for (o, &p) in out.iter_mut().zip(tile.pixels()) {
        *o = ((p as f64 - mean) / std) as f32;
    }
}

/// Train on the given tiles. Returns the network and the mean
/// cross-entropy loss per epoch.
pub fn train_classifier(
    train: &[LabeledTile],
    options: &TrainOptions,
    seed: u64,
) -> (Network, Vec<f64>) {
    assert!(!train.is_empty(), "empty training set");
    let mut net = init_network(&CLASSIFIER_SIZES, stream_seed(seed, domain::CLASSIFIER, 0))
        .expect("valid classifier shape");
    let mut rng = stream(seed, domain::CLASSIFIER, 1);

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grads = Gradients::zeros_like(&net);
    let mut scratch = BackwardScratch::default();
    let mut cache = ForwardCache::default();
    let mut input = vec![0.0f32; TILE_PIXELS];
    let mut out_grad = vec![0.0f32; TILE_CLASSES];
    let mut losses = Vec::with_capacity(options.epochs);
    let mut lr = options.learning_rate;

    for _epoch in 0..options.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0f64;
        for batch in order.chunks(options.batch_size) {
            for (k, &idx) in batch.iter().enumerate() {
                let sample = &train[idx];
                normalize_tile(&sample.image, &mut input);
                let logits = net.forward_into(&input, &mut cache);
                let probs = softmax(logits);
                let label = sample.label as usize;
                epoch_loss += -(probs[label].max(1e-12) as f64).ln();
                for (g, &p) in out_grad.iter_mut().zip(&probs) {
                    *g = p / batch.len() as f32;
                }
                out_grad[label] -= 1.0 / batch.len() as f32;
                net.backward_into(&cache, &out_grad, &mut grads, k > 0, &mut scratch);
            }
            net.sgd_step(&grads, lr);
        }
        losses.push(epoch_loss / train.len() as f64);
        lr *= options.lr_decay;
    }
    (net, losses)
}

/// Most likely class with its softmax probability.
pub fn classify_tile(net: &Network, tile: &Image) -> (u8, f64) {
    let mut input = vec![0.0f32; TILE_PIXELS];
    normalize_tile(tile, &mut input);
    let (logits, _cache) = net.forward(&input);
    let probs = softmax(&logits);
    let mut best = 0usize;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    (best as u8, probs[best] as f64)
}

#[derive(Clone, Debug)]
pub struct ClassifierEval {
    pub total: usize,
    pub correct: usize,
    /// confusion[truth][predicted]
    pub confusion: [[u32; TILE_CLASSES]; TILE_CLASSES],
}

impl ClassifierEval {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.correct as f64 / self.total as f64
    }
}

pub fn evaluate_classifier(net: &Network, tiles: &[LabeledTile]) -> ClassifierEval {
    let mut eval = ClassifierEval {
        total: tiles.len(),
        correct: 0,
        confusion: [[0; TILE_CLASSES]; TILE_CLASSES],
    };
    for t in tiles {
        let (pred, _) = classify_tile(net, &t.image);
        if pred == t.label {
            eval.correct += 1;
        }
        eval.confusion[t.label as usize][pred as usize] += 1;
    }
    eval
}
