//! Fully-connected ReLU baseline network.
//!
//! A conventional multi-layer perceptron over the same normalized parent-beam
//! features as the single-layer predictor: ReLU on every hidden layer, softmax
//! on the output. It exists as the comparison point the cheap model is judged
//! against — same inputs, same labels, same training loop, far more
//! parameters.

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureStats;
use crate::error::{Error, Result};
use crate::ml::complexity::LayerSpec;
use crate::ml::model::{logit_gradient, softmax, Gradients, LossKind};

/// One affine layer of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcLayer {
    /// Input width.
    pub n_inputs: usize,
    /// Output width.
    pub n_outputs: usize,
    /// Weights, row-major `n_inputs × n_outputs`.
    pub weights: Vec<f64>,
    /// Bias, length `n_outputs`.
    pub bias: Vec<f64>,
}

impl FcLayer {
    /// All-zero layer of the given shape.
    pub fn zeros(n_inputs: usize, n_outputs: usize) -> Self {
        FcLayer {
            n_inputs,
            n_outputs,
            weights: vec![0.0; n_inputs * n_outputs],
            bias: vec![0.0; n_outputs],
        }
    }

    /// Affine map of one input vector.
    fn affine(&self, input: &[f64]) -> Vec<f64> {
        let mut z = self.bias.clone();
        for (i, &x) in input.iter().enumerate() {
            let row = &self.weights[i * self.n_outputs..(i + 1) * self.n_outputs];
            for (zk, &w) in z.iter_mut().zip(row) {
                *zk += w * x;
            }
        }
        z
    }
}

/// Multi-layer perceptron: ReLU hidden layers, softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcNetwork {
    /// Layers, input side first; consecutive shapes must chain.
    pub layers: Vec<FcLayer>,
    /// Normalization the raw features must pass through before [`Self::forward`].
    pub feature_stats: FeatureStats,
    /// Fingerprint of the codebooks that produced the training data.
    pub codebook_fingerprint: String,
}

impl FcNetwork {
    /// All-zero network with the given layer widths (`[in, hidden…, out]`).
    pub fn zeros(
        widths: &[usize],
        feature_stats: FeatureStats,
        codebook_fingerprint: String,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::invalid(
                "widths",
                "need at least an input and an output width",
            ));
        }
        let layers = widths
            .windows(2)
            .map(|w| FcLayer::zeros(w[0], w[1]))
            .collect();
        let net = FcNetwork {
            layers,
            feature_stats,
            codebook_fingerprint,
        };
        net.validate()?;
        Ok(net)
    }

    /// Layer widths `[in, hidden…, out]`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].n_inputs];
        w.extend(self.layers.iter().map(|l| l.n_outputs));
        w
    }

    /// Input dimension.
    pub fn n_inputs(&self) -> usize {
        self.layers.first().map_or(0, |l| l.n_inputs)
    }

    /// Output dimension.
    pub fn n_outputs(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_outputs)
    }

    /// Layer descriptions for parameter and FLOP accounting.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers
            .iter()
            .map(|l| LayerSpec::Fc {
                n_inputs: l.n_inputs,
                n_outputs: l.n_outputs,
            })
            .collect()
    }

    /// Checks chaining, buffer shapes, and parameter finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::EmptyInput("network layers"));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.n_inputs == 0 || layer.n_outputs == 0 {
                return Err(Error::invalid("layer dims", format!("layer {l} has a zero width")));
            }
            if layer.weights.len() != layer.n_inputs * layer.n_outputs {
                return Err(Error::DimensionMismatch {
                    what: "layer weights",
                    expected: layer.n_inputs * layer.n_outputs,
                    actual: layer.weights.len(),
                });
            }
            if layer.bias.len() != layer.n_outputs {
                return Err(Error::DimensionMismatch {
                    what: "layer bias",
                    expected: layer.n_outputs,
                    actual: layer.bias.len(),
                });
            }
            if !layer.weights.iter().chain(&layer.bias).all(|p| p.is_finite()) {
                return Err(Error::invalid(
                    "layer parameters",
                    format!("layer {l} holds a non-finite value"),
                ));
            }
        }
        for pair in self.layers.windows(2) {
            if pair[0].n_outputs != pair[1].n_inputs {
                return Err(Error::DimensionMismatch {
                    what: "layer chain",
                    expected: pair[0].n_outputs,
                    actual: pair[1].n_inputs,
                });
            }
        }
        if self.feature_stats.mean.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                what: "network feature stats",
                expected: self.n_inputs(),
                actual: self.feature_stats.mean.len(),
            });
        }
        Ok(())
    }

    /// Post-activation outputs of every layer, input first, probabilities
    /// last. `trace[0]` is the input itself.
    fn trace(&self, features: &[f64]) -> Result<Vec<Vec<f64>>> {
        if features.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                what: "features",
                expected: self.n_inputs(),
                actual: features.len(),
            });
        }
        if !features.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("features", "must be finite"));
        }
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(features.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(trace.last().expect("trace is never empty"));
            if l + 1 == self.layers.len() {
                z = softmax(&z);
            } else {
                for zk in &mut z {
                    *zk = zk.max(0.0);
                }
            }
            trace.push(z);
        }
        Ok(trace)
    }

    /// Child-beam probabilities for one normalized feature vector.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(features)?.pop().expect("trace is never empty"))
    }
}

/// Exact analytic gradient of the mean batch loss, one [`Gradients`] per
/// layer, input side first.
pub fn backward_fc<'a, I>(net: &FcNetwork, batch: I, kind: LossKind) -> Result<Vec<Gradients>>
where
    I: IntoIterator<Item = (&'a [f64], usize)>,
{
    let mut grads: Vec<Gradients> = net
        .layers
        .iter()
        .map(|l| Gradients {
            weights: vec![0.0; l.n_inputs * l.n_outputs],
            bias: vec![0.0; l.n_outputs],
        })
        .collect();
    let mut count = 0usize;
    for (features, label) in batch {
        if label >= net.n_outputs() {
            return Err(Error::invalid(
                "label",
                format!("index {label} out of range for {} classes", net.n_outputs()),
            ));
        }
        let trace = net.trace(features)?;
        let probs = trace.last().expect("trace is never empty");
        let mut delta = logit_gradient(kind, probs, label);
        for l in (0..net.layers.len()).rev() {
            let layer = &net.layers[l];
            let input = &trace[l];
            for (i, &a) in input.iter().enumerate() {
                let row = &mut grads[l].weights[i * layer.n_outputs..(i + 1) * layer.n_outputs];
                for (dw, &dk) in row.iter_mut().zip(&delta) {
                    *dw += a * dk;
                }
            }
            for (db, &dk) in grads[l].bias.iter_mut().zip(&delta) {
                *db += dk;
            }
            if l > 0 {
                // Propagate through the weights, then gate by the ReLU: a
                // post-activation of zero means the unit was clipped.
                let mut prev = vec![0.0; layer.n_inputs];
                for (i, p) in prev.iter_mut().enumerate() {
                    if input[i] > 0.0 {
                        let row = &layer.weights[i * layer.n_outputs..(i + 1) * layer.n_outputs];
                        *p = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                    }
                }
                delta = prev;
            }
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("gradient batch"));
    }
    let scale = 1.0 / count as f64;
    for g in &mut grads {
        for v in g.weights.iter_mut().chain(&mut g.bias) {
            *v *= scale;
        }
    }
    Ok(grads)
}
