//! Affine-plus-softmax predictor and its training mathematics.
//!
//! The predictor maps a z-scored parent-beam RSRP vector `x` (length `F_p`)
//! to child-beam probabilities `softmax(Aᵀx + b)` (length `F`). Gradients
//! are analytic — the softmax Jacobian is folded into the loss derivative —
//! and [`AdamState`] applies the standard bias-corrected moment updates.
//! At 16×64 the model is small enough that plain `f64` slices beat any
//! linear-algebra dependency for clarity and speed.

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureStats;
use crate::error::{Error, Result};

/// Loss minimized during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Mean squared error between the softmax output and the one-hot label.
    #[default]
    Mse,
    /// Cross-entropy, kept selectable for comparison runs.
    CrossEntropy,
}

/// Single affine layer with a softmax head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSoftmaxModel {
    /// Input dimension (number of parent beams, `F_p`).
    pub n_inputs: usize,
    /// Output dimension (number of child beams, `F`).
    pub n_outputs: usize,
    /// Weight matrix `A`, row-major `n_inputs × n_outputs`.
    pub weights: Vec<f64>,
    /// Bias vector `b`, length `n_outputs`.
    pub bias: Vec<f64>,
    /// Normalization the raw features must pass through before [`Self::forward`].
    pub feature_stats: FeatureStats,
    /// Fingerprint of the codebooks that produced the training data.
    pub codebook_fingerprint: String,
}

impl LinearSoftmaxModel {
    /// All-zero model of the given shape; forward output is uniform.
    pub fn zeros(
        n_inputs: usize,
        n_outputs: usize,
        feature_stats: FeatureStats,
        codebook_fingerprint: String,
    ) -> Self {
        LinearSoftmaxModel {
            n_inputs,
            n_outputs,
            weights: vec![0.0; n_inputs * n_outputs],
            bias: vec![0.0; n_outputs],
            feature_stats,
            codebook_fingerprint,
        }
    }

    /// Checks shapes and parameter finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.n_inputs == 0 || self.n_outputs == 0 {
            return Err(Error::invalid("model dims", "must be positive"));
        }
        if self.weights.len() != self.n_inputs * self.n_outputs {
            return Err(Error::DimensionMismatch {
                what: "model weights",
                expected: self.n_inputs * self.n_outputs,
                actual: self.weights.len(),
            });
        }
        if self.bias.len() != self.n_outputs {
            return Err(Error::DimensionMismatch {
                what: "model bias",
                expected: self.n_outputs,
                actual: self.bias.len(),
            });
        }
        if self.feature_stats.mean.len() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                what: "model feature stats",
                expected: self.n_inputs,
                actual: self.feature_stats.mean.len(),
            });
        }
        if !self.weights.iter().chain(&self.bias).all(|p| p.is_finite()) {
            return Err(Error::invalid("model parameters", "must be finite"));
        }
        Ok(())
    }

    /// Affine map `Aᵀx + b` for one normalized feature vector.
    pub fn logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                what: "features",
                expected: self.n_inputs,
                actual: features.len(),
            });
        }
        if !features.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("features", "must be finite"));
        }
        let mut z = self.bias.clone();
        for (i, &x) in features.iter().enumerate() {
            let row = &self.weights[i * self.n_outputs..(i + 1) * self.n_outputs];
            for (zk, &w) in z.iter_mut().zip(row) {
                *zk += w * x;
            }
        }
        Ok(z)
    }

    /// Child-beam probabilities for one normalized feature vector.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(features)?))
    }
}

/// Numerically stabilized softmax: the max logit is subtracted before
/// exponentiation, which leaves the result unchanged but bounds every
/// exponent at zero.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Indicator vector with a one at `label`.
pub fn one_hot(label: usize, n: usize) -> Result<Vec<f64>> {
    if label >= n {
        return Err(Error::invalid(
            "label",
            format!("index {label} out of range for {n} classes"),
        ));
    }
    let mut v = vec![0.0; n];
    v[label] = 1.0;
    Ok(v)
}

/// Indices of the `k` largest probabilities, descending; ties resolve to the
/// lowest index.
pub fn predict_top_k(probs: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > probs.len() {
        return Err(Error::invalid(
            "k",
            format!("must lie in 1..={}, got {k}", probs.len()),
        ));
    }
    if !probs.iter().all(|p| p.is_finite()) {
        return Err(Error::invalid("probs", "must be finite"));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&i, &j| probs[j].partial_cmp(&probs[i]).unwrap().then(i.cmp(&j)));
    order.truncate(k);
    Ok(order)
}

/// Mean over classes of the squared difference between `probs` and `target`.
pub fn mse_loss(probs: &[f64], target: &[f64]) -> Result<f64> {
    if probs.len() != target.len() {
        return Err(Error::DimensionMismatch {
            what: "loss terms",
            expected: target.len(),
            actual: probs.len(),
        });
    }
    let n = probs.len().max(1) as f64;
    Ok(probs
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / n)
}

/// Cross-entropy `−Σ y·ln(p)`, with probabilities clamped away from zero.
pub fn cross_entropy_loss(probs: &[f64], target: &[f64]) -> Result<f64> {
    if probs.len() != target.len() {
        return Err(Error::DimensionMismatch {
            what: "loss terms",
            expected: target.len(),
            actual: probs.len(),
        });
    }
    Ok(probs
        .iter()
        .zip(target)
        .map(|(p, y)| -y * p.max(1e-300).ln())
        .sum())
}

/// Dispatches on [`LossKind`].
pub fn loss(kind: LossKind, probs: &[f64], target: &[f64]) -> Result<f64> {
    match kind {
        LossKind::Mse => mse_loss(probs, target),
        LossKind::CrossEntropy => cross_entropy_loss(probs, target),
    }
}

/// Loss derivative with respect to the logits for one sample.
///
/// For mean squared error composed with softmax the chain rule gives
/// `∂L/∂z_k = (2/F)·p_k·(d_k − Σ_j d_j p_j)` with `d = p − y`; for
/// cross-entropy it collapses to `p − y`.
pub(crate) fn logit_gradient(kind: LossKind, probs: &[f64], label: usize) -> Vec<f64> {
    match kind {
        LossKind::Mse => {
            let f = probs.len() as f64;
            let d: Vec<f64> = probs
                .iter()
                .enumerate()
                .map(|(k, &p)| p - f64::from(u8::from(k == label)))
                .collect();
            let s: f64 = d.iter().zip(probs).map(|(dk, pk)| dk * pk).sum();
            probs
                .iter()
                .zip(&d)
                .map(|(&pk, &dk)| 2.0 / f * pk * (dk - s))
                .collect()
        }
        LossKind::CrossEntropy => probs
            .iter()
            .enumerate()
            .map(|(k, &p)| p - f64::from(u8::from(k == label)))
            .collect(),
    }
}

/// Mean-batch gradients of the loss, same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// Gradient of the weight matrix, row-major `n_inputs × n_outputs`.
    pub weights: Vec<f64>,
    /// Gradient of the bias, length `n_outputs`.
    pub bias: Vec<f64>,
}

/// Exact analytic gradient of the mean batch loss with respect to the
/// model's weights and bias.
pub fn backward<'a, I>(model: &LinearSoftmaxModel, batch: I, kind: LossKind) -> Result<Gradients>
where
    I: IntoIterator<Item = (&'a [f64], usize)>,
{
    let mut d_weights = vec![0.0; model.n_inputs * model.n_outputs];
    let mut d_bias = vec![0.0; model.n_outputs];
    let mut count = 0usize;
    for (features, label) in batch {
        if label >= model.n_outputs {
            return Err(Error::invalid(
                "label",
                format!("index {label} out of range for {} classes", model.n_outputs),
            ));
        }
        let probs = model.forward(features)?;
        let g = logit_gradient(kind, &probs, label);
        for (i, &x) in features.iter().enumerate() {
            let row = &mut d_weights[i * model.n_outputs..(i + 1) * model.n_outputs];
            for (dw, &gk) in row.iter_mut().zip(&g) {
                *dw += x * gk;
            }
        }
        for (db, &gk) in d_bias.iter_mut().zip(&g) {
            *db += gk;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("gradient batch"));
    }
    let scale = 1.0 / count as f64;
    for dw in &mut d_weights {
        *dw *= scale;
    }
    for db in &mut d_bias {
        *db *= scale;
    }
    Ok(Gradients {
        weights: d_weights,
        bias: d_bias,
    })
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    /// Step size α.
    pub learning_rate: f64,
    /// First-moment decay β₁.
    pub beta1: f64,
    /// Second-moment decay β₂.
    pub beta2: f64,
    /// Denominator regularizer ε.
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamParams {
    /// Checks the scalars lie in their documented domains.
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::invalid("learning_rate", "must be finite and ≥ 0"));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) || beta == 0.0 {
                return Err(Error::invalid(name, "must lie strictly between 0 and 1"));
            }
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon", "must be finite and positive"));
        }
        Ok(())
    }
}

/// First and second moment buffers for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    /// Fresh state for a parameter vector of the given length.
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// Number of steps taken so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], hp: &AdamParams) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                what: "adam buffers",
                expected: self.m.len(),
                actual: if params.len() != self.m.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        self.t += 1;
        let bc1 = 1.0 - hp.beta1.powi(self.t as i32);
        let bc2 = 1.0 - hp.beta2.powi(self.t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(&mut self.v))
        {
            *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
            *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
            *p -= hp.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + hp.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use rand::Rng;

    fn stats(n: usize) -> FeatureStats {
        FeatureStats {
            mean: vec![0.0; n],
            std: vec![1.0; n],
        }
    }

    fn random_model(n_inputs: usize, n_outputs: usize, seed: u64) -> LinearSoftmaxModel {
        let mut rng = rng_from_seed(seed);
        let mut model = LinearSoftmaxModel::zeros(n_inputs, n_outputs, stats(n_inputs), "t".into());
        for w in model.weights.iter_mut().chain(&mut model.bias) {
            *w = rng.gen_range(-1.5..1.5);
        }
        model
    }

    fn batch_loss(
        model: &LinearSoftmaxModel,
        features: &[Vec<f64>],
        labels: &[usize],
        kind: LossKind,
    ) -> f64 {
        let total: f64 = features
            .iter()
            .zip(labels)
            .map(|(x, &y)| {
                let probs = model.forward(x).expect("forward");
                loss(kind, &probs, &one_hot(y, model.n_outputs).unwrap()).expect("loss")
            })
            .sum();
        total / features.len() as f64
    }

    // 1. A zero model spreads probability uniformly.
    #[test]
    fn zero_model_outputs_uniform() {
        let model = LinearSoftmaxModel::zeros(16, 64, stats(16), "t".into());
        let probs = model.forward(&vec![0.3; 16]).expect("forward");
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "probabilities must sum to one");
        for &p in &probs {
            assert!(
                (p - 1.0 / 64.0).abs() <= 1e-15,
                "zero logits must give exactly uniform output, got {p}"
            );
        }
    }

    // 2. A huge bias on one class saturates its probability.
    #[test]
    fn saturated_bias_concentrates_probability() {
        let mut model = LinearSoftmaxModel::zeros(16, 64, stats(16), "t".into());
        model.bias[17] = 1000.0;
        let probs = model.forward(&vec![0.0; 16]).expect("forward");
        assert!(
            probs[17] >= 1.0 - 1e-6,
            "saturated class holds all probability, got {}",
            probs[17]
        );
        assert!(probs.iter().all(|p| p.is_finite()), "no overflow allowed");
    }

    // 3. Forward matches a longhand evaluation performed without the
    //    max-subtraction trick.
    #[test]
    fn forward_matches_longhand_evaluation() {
        let model = random_model(5, 9, 31);
        let mut rng = rng_from_seed(77);
        for _ in 0..50 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let probs = model.forward(&x).expect("forward");
            let mut longhand = vec![0.0; 9];
            for k in 0..9 {
                let mut z = model.bias[k];
                for (i, &xi) in x.iter().enumerate() {
                    z += model.weights[i * 9 + k] * xi;
                }
                longhand[k] = z.exp();
            }
            let norm: f64 = longhand.iter().sum();
            for (k, &p) in probs.iter().enumerate() {
                assert!(
                    (p - longhand[k] / norm).abs() <= 1e-12,
                    "stabilized and longhand softmax must agree at class {k}"
                );
            }
        }
    }

    // 4. Adding a common constant to every logit leaves the output unchanged.
    #[test]
    fn softmax_is_shift_invariant() {
        let logits = [0.4, -1.2, 3.3, 0.0, 2.1];
        let base = softmax(&logits);
        let shifted: Vec<f64> = logits.iter().map(|z| z + 37.5).collect();
        for (a, b) in base.iter().zip(softmax(&shifted)) {
            assert!((a - b).abs() <= 1e-12, "softmax must be shift invariant");
        }
    }

    // 5. Softmax outputs are valid probabilities for random logits of many
    //    sizes, including large magnitudes that would overflow a naive exp.
    #[test]
    fn softmax_normalizes_random_logits() {
        let mut rng = rng_from_seed(5);
        for trial in 0..200 {
            let n = rng.gen_range(1..=80);
            let logits: Vec<f64> = (0..n).map(|_| rng.gen_range(-600.0..600.0)).collect();
            let probs = softmax(&logits);
            let sum: f64 = probs.iter().sum();
            assert!(
                (sum - 1.0).abs() <= 1e-12,
                "trial {trial}: sum deviates by {}",
                (sum - 1.0).abs()
            );
            assert!(
                probs.iter().all(|&p| (0.0..=1.0).contains(&p)),
                "trial {trial}: entries must lie in [0, 1]"
            );
        }
    }

    // 6. Forward rejects wrong lengths and non-finite features.
    #[test]
    fn forward_rejects_bad_input() {
        let model = LinearSoftmaxModel::zeros(4, 3, stats(4), "t".into());
        assert!(matches!(
            model.forward(&[0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            model.forward(&[0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::InvalidParameter { .. })
        ));
    }

    // 7. Ties resolve to the lowest index.
    #[test]
    fn top_k_resolves_ties_low() {
        assert_eq!(
            predict_top_k(&[0.25; 4], 1).expect("top-1 of uniform"),
            vec![0],
            "uniform probabilities must select index 0"
        );
        let mut peaked = vec![0.001; 64];
        peaked[17] = 0.937;
        assert_eq!(predict_top_k(&peaked, 1).expect("top-1"), vec![17]);
        let twin = [0.1, 0.2, 0.3, 0.1, 0.3];
        assert_eq!(
            predict_top_k(&twin, 3).expect("top-3"),
            vec![2, 4, 1],
            "equal maxima must order by index"
        );
    }

    // 8. Top-k agrees with a full-sort oracle and is invariant to any
    //    monotone transform of the scores (checked with exp).
    #[test]
    fn top_k_matches_sort_oracle() {
        let mut rng = rng_from_seed(42);
        for trial in 0..100 {
            let n = rng.gen_range(2..=64);
            let probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let k = rng.gen_range(1..=n);
            let mut oracle: Vec<usize> = (0..n).collect();
            oracle.sort_by(|&i, &j| probs[j].total_cmp(&probs[i]).then(i.cmp(&j)));
            oracle.truncate(k);
            let got = predict_top_k(&probs, k).expect("top-k");
            assert_eq!(got, oracle, "trial {trial}: mismatch against sort oracle");
            let warped: Vec<f64> = probs.iter().map(|p| p.exp()).collect();
            assert_eq!(
                predict_top_k(&warped, k).expect("top-k"),
                oracle,
                "trial {trial}: ranking must survive a monotone transform"
            );
        }
    }

    // 9. k outside 1..=F is rejected.
    #[test]
    fn top_k_rejects_out_of_range() {
        let probs = [0.5, 0.5];
        assert!(predict_top_k(&probs, 0).is_err(), "k = 0 must fail");
        assert!(predict_top_k(&probs, 3).is_err(), "k > F must fail");
    }

    // 10. MSE is zero at an exact match and equals the closed form
    //     (1/64)·[(63/64)² + 63·(1/64)²] = 63/4096 for uniform versus one-hot.
    #[test]
    fn mse_matches_closed_forms() {
        let target = one_hot(3, 64).unwrap();
        assert_eq!(
            mse_loss(&target, &target).expect("loss"),
            0.0,
            "exact prediction has zero loss"
        );
        let uniform = vec![1.0 / 64.0; 64];
        let got = mse_loss(&uniform, &target).expect("loss");
        assert!(
            (got - 63.0 / 4096.0).abs() <= 1e-12,
            "uniform-vs-one-hot loss must equal 63/4096, got {got}"
        );
    }

    // 11. Permuting probabilities and target together leaves the loss alone.
    #[test]
    fn mse_is_permutation_invariant() {
        let probs = [0.1, 0.5, 0.2, 0.2];
        let target = one_hot(1, 4).unwrap();
        let base = mse_loss(&probs, &target).unwrap();
        let perm = [3usize, 0, 2, 1];
        let probs_p: Vec<f64> = perm.iter().map(|&i| probs[i]).collect();
        let target_p: Vec<f64> = perm.iter().map(|&i| target[i]).collect();
        assert!(
            (mse_loss(&probs_p, &target_p).unwrap() - base).abs() <= 1e-15,
            "loss must not depend on class order"
        );
    }

    // 12. Cross-entropy reference points: ln(n) for uniform, zero for exact.
    #[test]
    fn cross_entropy_reference_points() {
        let target = one_hot(5, 64).unwrap();
        let uniform = vec![1.0 / 64.0; 64];
        let got = cross_entropy_loss(&uniform, &target).unwrap();
        assert!(
            (got - 64f64.ln()).abs() <= 1e-12,
            "uniform prediction costs ln(64), got {got}"
        );
        assert!(
            cross_entropy_loss(&target, &target).unwrap().abs() <= 1e-12,
            "exact prediction costs nothing"
        );
    }

    // 13. The analytic gradient matches central finite differences over 100
    //     random instances, for both loss kinds.
    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(99);
        for trial in 0..100 {
            let kind = if trial % 2 == 0 {
                LossKind::Mse
            } else {
                LossKind::CrossEntropy
            };
            let model = random_model(5, 7, 1000 + trial);
            let batch = rng.gen_range(1..=4);
            let features: Vec<Vec<f64>> = (0..batch)
                .map(|_| (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let labels: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..7)).collect();
            let grads = backward(
                &model,
                features.iter().map(|x| x.as_slice()).zip(labels.clone()),
                kind,
            )
            .expect("backward");

            let step = 1e-5;
            let mut fd = Vec::with_capacity(grads.weights.len() + grads.bias.len());
            for idx in 0..model.weights.len() + model.bias.len() {
                let mut plus = model.clone();
                let mut minus = model.clone();
                if idx < model.weights.len() {
                    plus.weights[idx] += step;
                    minus.weights[idx] -= step;
                } else {
                    plus.bias[idx - model.weights.len()] += step;
                    minus.bias[idx - model.weights.len()] -= step;
                }
                fd.push(
                    (batch_loss(&plus, &features, &labels, kind)
                        - batch_loss(&minus, &features, &labels, kind))
                        / (2.0 * step),
                );
            }
            let analytic: Vec<f64> = grads
                .weights
                .iter()
                .chain(&grads.bias)
                .copied()
                .collect();
            let diff: f64 = analytic
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt()
                + fd.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(
                diff / scale.max(1e-12) < 1e-5,
                "trial {trial} ({kind:?}): relative gradient error {} too large",
                diff / scale.max(1e-12)
            );
        }
    }

    // 14. A batch of identical samples has the single-sample gradient.
    #[test]
    fn identical_batch_equals_single_gradient() {
        let model = random_model(4, 6, 7);
        let x = vec![0.2, -1.1, 0.7, 0.0];
        let single = backward(&model, [(x.as_slice(), 2)], LossKind::Mse).unwrap();
        let triple = backward(
            &model,
            std::iter::repeat((x.as_slice(), 2)).take(3),
            LossKind::Mse,
        )
        .unwrap();
        for (a, b) in single
            .weights
            .iter()
            .chain(&single.bias)
            .zip(triple.weights.iter().chain(&triple.bias))
        {
            assert!(
                (a - b).abs() <= 1e-15,
                "averaging identical samples must not move the gradient"
            );
        }
    }

    // 15. A feature that is zero across the batch contributes no weight
    //     gradient in its row.
    #[test]
    fn zero_feature_column_gets_zero_weight_gradient() {
        let model = random_model(4, 6, 8);
        let x = vec![0.9, 0.0, -0.4, 1.2];
        let grads = backward(&model, [(x.as_slice(), 3)], LossKind::Mse).unwrap();
        for k in 0..6 {
            assert_eq!(
                grads.weights[6 + k], 0.0,
                "row of a zero input must have exactly zero gradient"
            );
        }
        assert!(
            grads.weights.iter().any(|&g| g != 0.0),
            "other rows must still receive gradient"
        );
    }

    // 16. Zero gradients leave parameters untouched while the step counter
    //     still advances.
    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut params = vec![0.5, -0.25, 3.0];
        let mut state = AdamState::new(3);
        state
            .step(&mut params, &[0.0; 3], &AdamParams::default())
            .expect("step");
        assert_eq!(params, vec![0.5, -0.25, 3.0], "zero gradient moves nothing");
        assert_eq!(state.t(), 1, "step counter must advance");
    }

    // 17. The first bias-corrected step is the learning rate times the
    //     gradient sign (up to ε).
    #[test]
    fn adam_first_step_moves_by_learning_rate_sign() {
        let hp = AdamParams::default();
        let mut params = vec![1.0, -2.0, 0.0];
        let grads = [3.0, -0.5, 0.25];
        let mut state = AdamState::new(3);
        state.step(&mut params, &grads, &hp).expect("step");
        let expected = [
            1.0 - hp.learning_rate,
            -2.0 + hp.learning_rate,
            0.0 - hp.learning_rate,
        ];
        for (p, e) in params.iter().zip(expected) {
            assert!(
                (p - e).abs() <= 1e-6 * hp.learning_rate.max(1.0),
                "first step must move by ±learning_rate, got {p} vs {e}"
            );
        }
        assert_eq!(state.t(), 1);
    }

    // 18. Identical states and inputs give identical updates; mismatched
    //     shapes are rejected.
    #[test]
    fn adam_is_deterministic_and_checks_shapes() {
        let hp = AdamParams::default();
        let grads = [0.3, -0.7];
        let mut a = (vec![1.0, 2.0], AdamState::new(2));
        let mut b = (vec![1.0, 2.0], AdamState::new(2));
        for _ in 0..5 {
            a.1.step(&mut a.0, &grads, &hp).unwrap();
            b.1.step(&mut b.0, &grads, &hp).unwrap();
        }
        assert_eq!(a.0, b.0, "updates must be bit-identical");
        assert!(
            matches!(
                a.1.step(&mut vec![0.0; 3], &grads, &hp),
                Err(Error::DimensionMismatch { .. })
            ),
            "length disagreement must be rejected"
        );
    }

    // 19. Validation catches inconsistent shapes and non-finite parameters.
    #[test]
    fn validate_rejects_malformed_models() {
        let good = random_model(3, 4, 1);
        good.validate().expect("well-formed model");
        let mut bad = good.clone();
        bad.weights.pop();
        assert!(bad.validate().is_err(), "short weight vector must fail");
        let mut nan = good.clone();
        nan.bias[0] = f64::NAN;
        assert!(nan.validate().is_err(), "non-finite parameter must fail");
        let mut stats_off = good;
        stats_off.feature_stats.mean.pop();
        assert!(stats_off.validate().is_err(), "stats length must match");
    }
}
