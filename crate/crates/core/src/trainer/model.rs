//! Entity-marker relation classifier with a replaceable linear head.
//!
//! Each argument is represented at its start marker. The marker's input vector
//! is the marker embedding plus the mean embedding of the tokens it encloses,
//! and the encoder maps it through `tanh(W x + b)`. The two start-marker states
//! are concatenated and scored by an affine head. Tokens outside the two
//! argument spans do not influence the output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instance::{MarkedInstance, E1_END, E1_START, E2_END, E2_START};
use crate::rng;
use crate::scalar::Scalar;
use crate::trainer::vocab::Vocab;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("marker {marker} missing at position {position}")]
    MarkerMissing { marker: &'static str, position: usize },
    #[error("label count must be at least 2, got {0}")]
    TooFewLabels(usize),
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub vocab: usize,
    pub dim: usize,
    pub hidden: usize,
    pub classes: usize,
}

/// The trainable tensors, row-major. Also used for gradients and Adam moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    /// vocab x dim
    pub embeddings: Vec<T>,
    /// hidden x dim
    pub enc_weight: Vec<T>,
    pub enc_bias: Vec<T>,
    /// classes x (2 * hidden)
    pub head_weight: Vec<T>,
    pub head_bias: Vec<T>,
}

impl<T: Scalar> Weights<T> {
    pub fn zeros(s: Shape) -> Self {
        Weights {
            embeddings: vec![T::zero(); s.vocab * s.dim],
            enc_weight: vec![T::zero(); s.hidden * s.dim],
            enc_bias: vec![T::zero(); s.hidden],
            head_weight: vec![T::zero(); s.classes * 2 * s.hidden],
            head_bias: vec![T::zero(); s.classes],
        }
    }

    pub fn tensors(&self) -> [&Vec<T>; 5] {
        [
            &self.embeddings,
            &self.enc_weight,
            &self.enc_bias,
            &self.head_weight,
            &self.head_bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<T>; 5] {
        [
            &mut self.embeddings,
            &mut self.enc_weight,
            &mut self.enc_bias,
            &mut self.head_weight,
            &mut self.head_bias,
        ]
    }

    pub fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

fn uniform_fill<T: Scalar>(out: &mut [T], scale: f64, r: &mut rng::Stream) {
    for x in out {
        *x = T::of((2.0 * rng::unit(r) - 1.0) * scale);
    }
}

/// An instance reduced to vocabulary rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub e1_marker: usize,
    pub e1_span: Vec<usize>,
    pub e2_marker: usize,
    pub e2_span: Vec<usize>,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub vocab: Vocab,
    pub shape: Shape,
    pub weights: Weights<T>,
}

/// Intermediate values of one forward pass, kept for the backward pass.
struct Trace<T> {
    x: [Vec<T>; 2],
    h: [Vec<T>; 2],
    logits: Vec<T>,
}

impl<T: Scalar> ModelParams<T> {
    /// Fresh model: encoder weights from the `(seed, "encoder")` stream and a
    /// head from the `(seed, "head", "initial")` stream. Uniform draws are
    /// scaled by `1/sqrt(fan_in)`; biases start at zero.
    pub fn init(
        vocab: Vocab,
        dim: usize,
        hidden: usize,
        classes: usize,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if classes < 2 {
            return Err(ModelError::TooFewLabels(classes));
        }
        if vocab.len() <= Vocab::RESERVED {
            return Err(ModelError::EmptyCorpus);
        }
        let shape = Shape {
            vocab: vocab.len(),
            dim,
            hidden,
            classes,
        };
        let mut weights = Weights::zeros(shape);
        let mut r = rng::stream(seed, &["init", "encoder"]);
        uniform_fill(&mut weights.embeddings, 1.0, &mut r);
        uniform_fill(&mut weights.enc_weight, 1.0 / (dim as f64).sqrt(), &mut r);
        let mut params = ModelParams {
            vocab,
            shape,
            weights,
        };
        params.reset_head(classes, seed, "initial");
        Ok(params)
    }

    fn reset_head(&mut self, classes: usize, seed: u64, tag: &str) {
        self.shape.classes = classes;
        let fan_in = 2 * self.shape.hidden;
        self.weights.head_weight = vec![T::zero(); classes * fan_in];
        self.weights.head_bias = vec![T::zero(); classes];
        let mut r = rng::stream(seed, &["init", "head", tag]);
        uniform_fill(&mut self.weights.head_weight, 1.0 / (fan_in as f64).sqrt(), &mut r);
    }

    /// Swaps in a freshly initialised head for `classes` labels. The vocabulary,
    /// embeddings, and encoder are left untouched.
    pub fn replace_head(&self, classes: usize, seed: u64, tag: &str) -> Result<Self, ModelError> {
        if classes < 2 {
            return Err(ModelError::TooFewLabels(classes));
        }
        let mut out = self.clone();
        out.reset_head(classes, seed, tag);
        Ok(out)
    }

    /// SHA-256 over the vocabulary, embeddings, and encoder tensors.
    pub fn encoder_hash(&self) -> String {
        let mut h = Sha256::new();
        for i in 0..self.vocab.len() {
            h.update(self.vocab.token(i).as_bytes());
            h.update([0u8]);
        }
        for t in [&self.weights.embeddings, &self.weights.enc_weight, &self.weights.enc_bias] {
            for x in t.iter() {
                h.update(x.as_f64().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Maps a marked instance onto vocabulary rows.
    pub fn encode(&self, m: &MarkedInstance, label: usize) -> Result<Encoded, ModelError> {
        for (marker, position) in [
            (E1_START, m.e1_start_pos),
            (E1_END, m.e1_end_pos),
            (E2_START, m.e2_start_pos),
            (E2_END, m.e2_end_pos),
        ] {
            if m.tokens.get(position).map(String::as_str) != Some(marker) {
                return Err(ModelError::MarkerMissing { marker, position });
            }
        }
        let ids = |r: std::ops::Range<usize>| m.tokens[r].iter().map(|t| self.vocab.id(t)).collect();
        Ok(Encoded {
            e1_marker: self.vocab.id(E1_START),
            e1_span: ids(m.e1_inner()),
            e2_marker: self.vocab.id(E2_START),
            e2_span: ids(m.e2_inner()),
            label,
        })
    }

    fn trace(&self, e: &Encoded) -> Trace<T> {
        let Shape { dim, hidden, classes, .. } = self.shape;
        let w = &self.weights;
        let emb = |row: usize| &w.embeddings[row * dim..(row + 1) * dim];
        let input = |marker: usize, span: &[usize]| {
            let mut x: Vec<T> = emb(marker).to_vec();
            if !span.is_empty() {
                let inv = T::one() / T::of(span.len() as f64);
                for &row in span {
                    for (xi, &ei) in x.iter_mut().zip(emb(row)) {
                        *xi = *xi + ei * inv;
                    }
                }
            }
            x
        };
        let x = [input(e.e1_marker, &e.e1_span), input(e.e2_marker, &e.e2_span)];
        let h = [0, 1].map(|s| {
            (0..hidden)
                .map(|j| {
                    let row = &w.enc_weight[j * dim..(j + 1) * dim];
                    let z = row.iter().zip(&x[s]).fold(w.enc_bias[j], |acc, (&a, &b)| acc + a * b);
                    z.tanh()
                })
                .collect::<Vec<T>>()
        });
        let logits = (0..classes)
            .map(|k| {
                let row = &w.head_weight[k * 2 * hidden..(k + 1) * 2 * hidden];
                let r = h[0].iter().chain(&h[1]);
                row.iter().zip(r).fold(w.head_bias[k], |acc, (&a, &b)| acc + a * b)
            })
            .collect();
        Trace { x, h, logits }
    }

    pub fn logits(&self, e: &Encoded) -> Vec<T> {
        self.trace(e).logits
    }

    /// Logits for a marked instance.
    pub fn forward(&self, m: &MarkedInstance) -> Result<Vec<T>, ModelError> {
        Ok(self.logits(&self.encode(m, 0)?))
    }

    pub fn predict(&self, e: &Encoded) -> usize {
        argmax(&self.logits(e))
    }

    /// Mean cross-entropy over `batch`; adds the mean gradient into `grads`.
    pub fn loss_and_grad(&self, batch: &[Encoded], grads: &mut Weights<T>) -> T {
        let Shape { dim, hidden, classes, .. } = self.shape;
        let w = &self.weights;
        let scale = T::one() / T::of(batch.len().max(1) as f64);
        let mut total = T::zero();
        for e in batch {
            let tr = self.trace(e);
            let (loss, probs) = cross_entropy(&tr.logits, e.label);
            total = total + loss;
            let mut dlogits = probs;
            dlogits[e.label] = dlogits[e.label] - T::one();
            for d in dlogits.iter_mut() {
                *d = *d * scale;
            }
            let mut dr = vec![T::zero(); 2 * hidden];
            for k in 0..classes {
                let g = dlogits[k];
                grads.head_bias[k] = grads.head_bias[k] + g;
                let row = k * 2 * hidden;
                for (i, ri) in tr.h[0].iter().chain(&tr.h[1]).enumerate() {
                    grads.head_weight[row + i] = grads.head_weight[row + i] + g * *ri;
                    dr[i] = dr[i] + g * w.head_weight[row + i];
                }
            }
            for (s, (marker, span)) in [(e.e1_marker, &e.e1_span), (e.e2_marker, &e.e2_span)]
                .into_iter()
                .enumerate()
            {
                let mut dx = vec![T::zero(); dim];
                for j in 0..hidden {
                    let hj = tr.h[s][j];
                    let dz = dr[s * hidden + j] * (T::one() - hj * hj);
                    grads.enc_bias[j] = grads.enc_bias[j] + dz;
                    for i in 0..dim {
                        grads.enc_weight[j * dim + i] = grads.enc_weight[j * dim + i] + dz * tr.x[s][i];
                        dx[i] = dx[i] + dz * w.enc_weight[j * dim + i];
                    }
                }
                for i in 0..dim {
                    let g = &mut grads.embeddings[marker * dim + i];
                    *g = *g + dx[i];
                }
                if !span.is_empty() {
                    let inv = T::one() / T::of(span.len() as f64);
                    for &row in span {
                        for i in 0..dim {
                            let g = &mut grads.embeddings[row * dim + i];
                            *g = *g + dx[i] * inv;
                        }
                    }
                }
            }
        }
        total * scale
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, batch: &[Encoded]) -> T {
        let total: T = batch
            .iter()
            .map(|e| cross_entropy(&self.logits(e), e.label).0)
            .sum();
        total / T::of(batch.len().max(1) as f64)
    }
}

/// Index of the largest logit (first on ties).
pub fn argmax<T: Scalar>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Softmax probabilities via a max-shifted exponent.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-log softmax(logits)[label]` computed with log-sum-exp, and the softmax.
pub fn cross_entropy<T: Scalar>(logits: &[T], label: usize) -> (T, Vec<T>) {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let sum: T = logits.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    let probs = logits.iter().map(|&z| (z - lse).exp()).collect();
    (lse - logits[label], probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::mark_instance;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_owned).collect()
    }

    fn model(seed: u64) -> ModelParams<f64> {
        let t = toks("a b c d e f g");
        let vocab = Vocab::build([&t[..]], 100);
        ModelParams::init(vocab, 4, 4, 3, seed).unwrap()
    }

    #[test]
    fn shapes_and_determinism() {
        let t = toks("a b c d e");
        let vocab = Vocab::build([&t[..]], 10);
        assert_eq!(vocab.len(), 10);
        let m = ModelParams::<f64>::init(vocab, 4, 4, 2, 1).unwrap();
        assert_eq!(m.weights.head_weight.len(), 2 * 8);
        assert_eq!(m.weights.embeddings.len(), 10 * 4);
        assert_eq!(model(7), model(7));
        assert_ne!(model(7).weights, model(8).weights);
    }

    #[test]
    fn too_few_labels_and_empty_vocab() {
        let t = toks("a");
        let v = Vocab::build([&t[..]], 10);
        assert_eq!(
            ModelParams::<f64>::init(v.clone(), 2, 2, 1, 0).unwrap_err(),
            ModelError::TooFewLabels(1)
        );
        let empty: [&[String]; 0] = [];
        let v0 = Vocab::build(empty, 10);
        assert_eq!(
            ModelParams::<f64>::init(v0, 2, 2, 2, 0).unwrap_err(),
            ModelError::EmptyCorpus
        );
        assert!(model(1).replace_head(1, 0, "x").is_err());
    }

    #[test]
    fn zero_weights_zero_logits() {
        let mut m = model(3);
        m.weights.fill_zero();
        let inst = mark_instance(&toks("a b c"), (0, 1), (2, 3), "x").unwrap();
        assert!(m.forward(&inst).unwrap().iter().all(|&z| z == 0.0));
    }

    #[test]
    fn context_outside_arguments_is_ignored() {
        let m = model(5);
        let a = mark_instance(&toks("a b c d e"), (1, 2), (3, 4), "x").unwrap();
        let b = mark_instance(&toks("g b f d c"), (1, 2), (3, 4), "x").unwrap();
        assert_eq!(m.forward(&a).unwrap(), m.forward(&b).unwrap());
        let c = mark_instance(&toks("a c c d e"), (1, 2), (3, 4), "x").unwrap();
        assert_ne!(m.forward(&a).unwrap(), m.forward(&c).unwrap());
    }

    #[test]
    fn missing_marker() {
        let m = model(5);
        let mut inst = mark_instance(&toks("a b c"), (0, 1), (2, 3), "x").unwrap();
        inst.tokens[inst.e2_start_pos] = "b".into();
        assert!(matches!(m.forward(&inst), Err(ModelError::MarkerMissing { marker: "<e2>", .. })));
    }

    #[test]
    fn head_replacement_keeps_encoder() {
        let m = model(9);
        let r = m.replace_head(18, 9, "finetune").unwrap();
        assert_eq!(r.encoder_hash(), m.encoder_hash());
        assert_eq!(r.weights.head_weight.len(), 18 * 8);
        assert_eq!(r.shape.classes, 18);
        let same_k = m.replace_head(3, 10, "other").unwrap();
        assert_eq!(same_k.encoder_hash(), m.encoder_hash());
        assert_ne!(same_k.weights.head_weight, m.weights.head_weight);
    }

    #[test]
    fn stable_cross_entropy_at_large_logits() {
        let (loss, p) = cross_entropy(&[1000.0f64, 0.0, -1000.0], 0);
        assert!(loss.abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (loss, _) = cross_entropy(&[1000.0f64, 0.0], 1);
        assert!((loss - 1000.0).abs() < 1e-9);
        let s = softmax(&[3.0f32, 3.0]);
        assert_eq!(s, vec![0.5, 0.5]);
    }

    #[test]
    fn f32_model_runs() {
        let t = toks("a b c");
        let vocab = Vocab::build([&t[..]], 10);
        let m = ModelParams::<f32>::init(vocab, 3, 3, 2, 1).unwrap();
        let inst = mark_instance(&t, (0, 1), (2, 3), "x").unwrap();
        let e = m.encode(&inst, 1).unwrap();
        let mut g = Weights::zeros(m.shape);
        let loss = m.loss_and_grad(&[e], &mut g);
        assert!(loss > 0.0 && loss.is_finite());
        assert!(g.all_finite());
    }
}
