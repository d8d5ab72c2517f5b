//! Low-complexity beam prediction.
//!
//! The core of this module is a deliberately small predictor: one affine
//! layer and a softmax ([`LinearSoftmaxModel`]) mapping the 16 parent-beam
//! RSRP measurements of a drop to a probability for each of the 64 child
//! transmit beams. Submodules supply the pieces around it:
//!
//! - [`mod@model`] (re-exported here): forward pass, top-k prediction,
//!   losses, analytic gradients, and the Adam update;
//! - `train`: the deterministic mini-batch loop with per-epoch history;
//! - `fc`: a conventional multi-layer ReLU baseline for comparison;
//! - `complexity`: parameter/FLOP/size accounting that quantifies the gap
//!   between the two.
//!
//! Trained artifacts serialize as JSON tagged by kind ([`Predictor`]) and
//! carry both their feature normalization and the fingerprint of the
//! codebooks they were trained against, so evaluation can refuse a
//! model/dataset mismatch.

mod complexity;
mod fc;
mod model;
mod train;

pub use complexity::{
    analyze, count_flops, count_params, model_size_bits, proposed_layer_specs,
    reference_fc_chain, reference_table, render_size_mbit, render_table_csv, ComplexityReport,
    LayerSpec, Source, TableRow, TABLE_PRECISION_BITS,
};
pub use fc::{backward_fc, FcLayer, FcNetwork};
pub use model::{
    backward, cross_entropy_loss, loss, mse_loss, one_hot, predict_top_k, softmax, AdamParams,
    AdamState, Gradients, LinearSoftmaxModel, LossKind,
};
pub use train::{train, train_fc, write_history_csv, EpochStats, TrainConfig};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureStats;
use crate::error::Result;

/// A trained predictor of either kind, as stored in model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Predictor {
    /// Single affine layer plus softmax.
    LinearSoftmax(LinearSoftmaxModel),
    /// Fully-connected ReLU baseline.
    FcNetwork(FcNetwork),
}

impl Predictor {
    /// Checks the wrapped model.
    pub fn validate(&self) -> Result<()> {
        match self {
            Predictor::LinearSoftmax(m) => m.validate(),
            Predictor::FcNetwork(n) => n.validate(),
        }
    }

    /// Input dimension (number of parent beams).
    pub fn n_inputs(&self) -> usize {
        match self {
            Predictor::LinearSoftmax(m) => m.n_inputs,
            Predictor::FcNetwork(n) => n.n_inputs(),
        }
    }

    /// Output dimension (number of child beams).
    pub fn n_outputs(&self) -> usize {
        match self {
            Predictor::LinearSoftmax(m) => m.n_outputs,
            Predictor::FcNetwork(n) => n.n_outputs(),
        }
    }

    /// Normalization baked in at training time.
    pub fn feature_stats(&self) -> &FeatureStats {
        match self {
            Predictor::LinearSoftmax(m) => &m.feature_stats,
            Predictor::FcNetwork(n) => &n.feature_stats,
        }
    }

    /// Fingerprint of the codebooks the model was trained for.
    pub fn codebook_fingerprint(&self) -> &str {
        match self {
            Predictor::LinearSoftmax(m) => &m.codebook_fingerprint,
            Predictor::FcNetwork(n) => &n.codebook_fingerprint,
        }
    }

    /// Probabilities for one *normalized* feature vector.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        match self {
            Predictor::LinearSoftmax(m) => m.forward(features),
            Predictor::FcNetwork(n) => n.forward(features),
        }
    }

    /// Probabilities for one raw (dBm) feature vector: applies the stored
    /// normalization, then the forward pass.
    pub fn predict_raw(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.forward(&self.feature_stats().normalize(raw)?)
    }

    /// Writes the model as pretty-printed JSON.
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Reads a model back and validates it.
    pub fn load_json(path: &Path) -> Result<Predictor> {
        let text = std::fs::read_to_string(path)?;
        let predictor: Predictor = serde_json::from_str(&text)?;
        predictor.validate()?;
        Ok(predictor)
    }
}
