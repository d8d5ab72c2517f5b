//! Mini-batch Adam training for the beam predictors.
//!
//! Training is fully deterministic: the parameter initialization draws from
//! the stream `derive_seed(seed, &[0])` and the shuffle of epoch `e` from
//! `derive_seed(seed, &[1, e])`, so a config plus a dataset reproduces the
//! final weights bit for bit. One [`EpochStats`] row per epoch records train
//! and validation loss and validation top-1 accuracy; by default the
//! final-epoch model is returned, with best-validation selection behind a
//! flag.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Split};
use crate::error::{Error, Result};
use crate::ml::fc::{backward_fc, FcLayer, FcNetwork};
use crate::ml::model::{
    backward, loss, one_hot, predict_top_k, AdamParams, AdamState, LinearSoftmaxModel, LossKind,
};
use crate::seeding::{derive_seed, rng_from_seed};

/// Everything a training run depends on besides the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of passes over the training split.
    pub epochs: usize,
    /// Mini-batch size; the last batch of an epoch may be smaller.
    pub batch_size: usize,
    /// Adam step size α.
    pub learning_rate: f64,
    /// Adam first-moment decay β₁.
    pub beta1: f64,
    /// Adam second-moment decay β₂.
    pub beta2: f64,
    /// Adam denominator regularizer ε.
    pub epsilon: f64,
    /// Seed for initialization and epoch shuffles.
    pub seed: u64,
    /// Loss minimized by the updates.
    pub loss: LossKind,
    /// Return the epoch with the best validation top-1 instead of the last.
    pub select_best_val: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 128,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            loss: LossKind::Mse,
            select_best_val: false,
        }
    }
}

impl TrainConfig {
    /// The Adam scalars as one record.
    pub fn adam_params(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    /// Checks every scalar lies in its documented domain.
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        self.adam_params().validate()
    }
}

/// Loss and accuracy snapshot after one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Epoch number, starting at 1.
    pub epoch: usize,
    /// Mean loss over the training split, measured after the epoch's updates.
    pub train_loss: f64,
    /// Mean loss over the validation split.
    pub val_loss: f64,
    /// Top-1 accuracy on the validation split.
    pub val_top1: f64,
}

/// Writes history rows as CSV: `epoch,train_loss,val_loss,val_top1`.
pub fn write_history_csv(path: &Path, history: &[EpochStats]) -> Result<()> {
    let mut out = String::from("epoch,train_loss,val_loss,val_top1\n");
    for row in history {
        out.push_str(&format!(
            "{},{:.8e},{:.8e},{:.8e}\n",
            row.epoch, row.train_loss, row.val_loss, row.val_top1
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Normalized features and labels of the rows a training run touches.
struct Prepared {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    train_rows: Vec<usize>,
    val_rows: Vec<usize>,
}

fn prepare(dataset: &Dataset) -> Result<Prepared> {
    let train_rows = dataset.rows(Split::Train);
    let val_rows = dataset.rows(Split::Val);
    if train_rows.is_empty() {
        return Err(Error::EmptyInput("train split"));
    }
    if val_rows.is_empty() {
        return Err(Error::EmptyInput("validation split"));
    }
    let features = (0..dataset.len())
        .map(|i| dataset.normalized_features(i))
        .collect::<Result<Vec<_>>>()?;
    let labels = dataset.samples.iter().map(|s| s.label).collect();
    Ok(Prepared {
        features,
        labels,
        train_rows,
        val_rows,
    })
}

/// Mean loss and top-1 accuracy of `forward` over the given rows.
fn eval_rows<F>(prep: &Prepared, rows: &[usize], n_classes: usize, kind: LossKind, forward: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut loss_sum = 0.0;
    let mut hits = 0usize;
    for &i in rows {
        let probs = forward(&prep.features[i])?;
        loss_sum += loss(kind, &probs, &one_hot(prep.labels[i], n_classes)?)?;
        if predict_top_k(&probs, 1)?[0] == prep.labels[i] {
            hits += 1;
        }
    }
    Ok((loss_sum / rows.len() as f64, hits as f64 / rows.len() as f64))
}

/// Uniform initialization over ±√(6 / (n_in + n_out)), drawn in row-major
/// order from the given stream; biases start at zero.
pub(crate) fn init_linear(n_inputs: usize, n_outputs: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let limit = (6.0 / (n_inputs + n_outputs) as f64).sqrt();
    let weights = (0..n_inputs * n_outputs)
        .map(|_| rng.gen_range(-limit..limit))
        .collect();
    (weights, vec![0.0; n_outputs])
}

/// Trains the affine-softmax predictor with mini-batch Adam.
///
/// Returns the trained model and one [`EpochStats`] per epoch. The model is
/// the final-epoch one unless [`TrainConfig::select_best_val`] asks for the
/// epoch with the highest validation top-1 (earliest such epoch on ties).
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(LinearSoftmaxModel, Vec<EpochStats>)> {
    config.validate()?;
    let prep = prepare(dataset)?;
    let (n_inputs, n_outputs) = (dataset.feature_dim(), dataset.num_classes());

    let mut init_rng = rng_from_seed(derive_seed(config.seed, &[0]));
    let (weights, bias) = init_linear(n_inputs, n_outputs, &mut init_rng);
    let mut model = LinearSoftmaxModel {
        n_inputs,
        n_outputs,
        weights,
        bias,
        feature_stats: dataset.feature_stats.clone(),
        codebook_fingerprint: dataset.codebook_fingerprint.clone(),
    };

    let hp = config.adam_params();
    let mut w_state = AdamState::new(model.weights.len());
    let mut b_state = AdamState::new(model.bias.len());
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, LinearSoftmaxModel)> = None;

    for epoch in 0..config.epochs {
        let mut order = prep.train_rows.clone();
        order.shuffle(&mut rng_from_seed(derive_seed(config.seed, &[1, epoch as u64])));
        for chunk in order.chunks(config.batch_size) {
            let grads = backward(
                &model,
                chunk.iter().map(|&i| (prep.features[i].as_slice(), prep.labels[i])),
                config.loss,
            )?;
            w_state.step(&mut model.weights, &grads.weights, &hp)?;
            b_state.step(&mut model.bias, &grads.bias, &hp)?;
        }
        let (train_loss, _) = eval_rows(&prep, &prep.train_rows, n_outputs, config.loss, |x| {
            model.forward(x)
        })?;
        let (val_loss, val_top1) = eval_rows(&prep, &prep.val_rows, n_outputs, config.loss, |x| {
            model.forward(x)
        })?;
        history.push(EpochStats {
            epoch: epoch + 1,
            train_loss,
            val_loss,
            val_top1,
        });
        if config.select_best_val && best.as_ref().map_or(true, |(b, _)| val_top1 > *b) {
            best = Some((val_top1, model.clone()));
        }
    }

    if let Some((_, chosen)) = best {
        model = chosen;
    }
    Ok((model, history))
}

/// Trains the fully-connected baseline on the same schedule as [`train`].
///
/// `hidden` lists the hidden-layer widths; empty means a single affine layer.
pub fn train_fc(
    dataset: &Dataset,
    hidden: &[usize],
    config: &TrainConfig,
) -> Result<(FcNetwork, Vec<EpochStats>)> {
    config.validate()?;
    let prep = prepare(dataset)?;
    let mut widths = vec![dataset.feature_dim()];
    widths.extend_from_slice(hidden);
    widths.push(dataset.num_classes());

    let mut init_rng = rng_from_seed(derive_seed(config.seed, &[0]));
    let layers: Vec<FcLayer> = widths
        .windows(2)
        .map(|w| {
            let (weights, bias) = init_linear(w[0], w[1], &mut init_rng);
            FcLayer {
                n_inputs: w[0],
                n_outputs: w[1],
                weights,
                bias,
            }
        })
        .collect();
    let mut net = FcNetwork {
        layers,
        feature_stats: dataset.feature_stats.clone(),
        codebook_fingerprint: dataset.codebook_fingerprint.clone(),
    };
    net.validate()?;

    let hp = config.adam_params();
    let mut states: Vec<(AdamState, AdamState)> = net
        .layers
        .iter()
        .map(|l| (AdamState::new(l.weights.len()), AdamState::new(l.bias.len())))
        .collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, FcNetwork)> = None;

    for epoch in 0..config.epochs {
        let mut order = prep.train_rows.clone();
        order.shuffle(&mut rng_from_seed(derive_seed(config.seed, &[1, epoch as u64])));
        for chunk in order.chunks(config.batch_size) {
            let grads = backward_fc(
                &net,
                chunk.iter().map(|&i| (prep.features[i].as_slice(), prep.labels[i])),
                config.loss,
            )?;
            for (l, g) in grads.iter().enumerate() {
                states[l].0.step(&mut net.layers[l].weights, &g.weights, &hp)?;
                states[l].1.step(&mut net.layers[l].bias, &g.bias, &hp)?;
            }
        }
        let n_classes = net.n_outputs();
        let (train_loss, _) =
            eval_rows(&prep, &prep.train_rows, n_classes, config.loss, |x| net.forward(x))?;
        let (val_loss, val_top1) =
            eval_rows(&prep, &prep.val_rows, n_classes, config.loss, |x| net.forward(x))?;
        history.push(EpochStats {
            epoch: epoch + 1,
            train_loss,
            val_loss,
            val_top1,
        });
        if config.select_best_val && best.as_ref().map_or(true, |(b, _)| val_top1 > *b) {
            best = Some((val_top1, net.clone()));
        }
    }

    if let Some((_, chosen)) = best {
        net = chosen;
    }
    Ok((net, history))
}
