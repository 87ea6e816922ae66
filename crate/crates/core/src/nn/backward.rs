//! Exact backpropagation through the pair-scoring pipeline.
//!
//! The primitive is score-space: given a feature row and ∂L/∂score, push
//! the gradient through the affine/LeakyReLU chain. [`backward_batch`]
//! layers the categorical log-prob pathway on top: each sample carries the
//! candidate feature rows of one driver-step, the chosen candidate and
//! ∂L/∂log p(chosen); the softmax Jacobian turns that into per-candidate
//! score gradients. Accumulation order is fixed by sample index, so the
//! result is independent of threading.

use super::{masked_softmax, MlpParams, LEAKY_SLOPE};
use crate::Result;

/// Parameter-shaped gradient (or moment) accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Grads {
    pub fn zeros_like(net: &MlpParams) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGrad {
                    w: vec![0.0; l.w.len()],
                    b: vec![0.0; l.b.len()],
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Grads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.w.iter_mut().zip(&b.w) {
                *x += y;
            }
            for (x, y) in a.b.iter_mut().zip(&b.b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for x in &mut l.w {
                *x *= factor;
            }
            for x in &mut l.b {
                *x *= factor;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(&l.b))
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Per-layer activations cached during a forward pass plus delta buffers.
#[derive(Debug, Clone)]
pub struct BackpropScratch {
    /// Post-activation of each layer (last entry is the raw output).
    acts: Vec<Vec<f64>>,
    delta_a: Vec<f64>,
    delta_b: Vec<f64>,
}

impl BackpropScratch {
    pub fn for_net(net: &MlpParams) -> Self {
        let width = net.layers().iter().map(|l| l.out_dim).max().unwrap_or(1);
        Self {
            acts: net.layers().iter().map(|l| vec![0.0; l.out_dim]).collect(),
            delta_a: vec![0.0; width],
            delta_b: vec![0.0; width],
        }
    }
}

impl MlpParams {
    /// Forward pass that stores every post-activation for a later
    /// [`MlpParams::backprop_into`] on the same input.
    pub fn forward_cached(&self, features: &[f64], scratch: &mut BackpropScratch) -> f64 {
        debug_assert_eq!(features.len(), self.input_dim());
        let n_layers = self.layers().len();
        for idx in 0..n_layers {
            let (done, rest) = scratch.acts.split_at_mut(idx);
            let src: &[f64] = if idx == 0 { features } else { &done[idx - 1] };
            let layer = &self.layers()[idx];
            let dst = &mut rest[0];
            super::affine(layer, src, dst);
            if idx + 1 < n_layers {
                for v in dst.iter_mut() {
                    if *v < 0.0 {
                        *v *= LEAKY_SLOPE;
                    }
                }
            }
        }
        scratch.acts[n_layers - 1][0]
    }

    /// Accumulate ∂(out_grad·score)/∂params into `grads`. Must be called
    /// with the scratch filled by `forward_cached` on the same features.
    pub fn backprop_into(
        &self,
        features: &[f64],
        scratch: &mut BackpropScratch,
        out_grad: f64,
        grads: &mut Grads,
    ) {
        let n_layers = self.layers().len();
        scratch.delta_a[0] = out_grad;
        let mut live_a = true;
        for idx in (0..n_layers).rev() {
            let layer = &self.layers()[idx];
            let (delta, next_delta) = if live_a {
                (&mut scratch.delta_a, &mut scratch.delta_b)
            } else {
                (&mut scratch.delta_b, &mut scratch.delta_a)
            };
            let input: &[f64] = if idx == 0 {
                features
            } else {
                &scratch.acts[idx - 1]
            };
            let g = &mut grads.layers[idx];
            for o in 0..layer.out_dim {
                let d = delta[o];
                if d != 0.0 {
                    g.b[o] += d;
                    let row = &mut g.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (gw, x) in row.iter_mut().zip(input) {
                        *gw += d * x;
                    }
                }
            }
            if idx > 0 {
                // delta for the previous layer: (W^T delta) ∘ leaky'(z).
                let prev = &scratch.acts[idx - 1];
                for (i, nd) in next_delta.iter_mut().take(layer.in_dim).enumerate() {
                    let mut acc = 0.0;
                    for o in 0..layer.out_dim {
                        acc += layer.w[o * layer.in_dim + i] * delta[o];
                    }
                    *nd = if prev[i] > 0.0 { acc } else { acc * LEAKY_SLOPE };
                }
                live_a = !live_a;
            }
        }
    }
}

/// One driver-step sample for the log-prob batch gradient.
#[derive(Debug, Clone)]
pub struct LogProbSample<'a> {
    /// Candidate feature rows, flattened `n_candidates × input_dim`.
    pub features: &'a [f64],
    pub n_candidates: usize,
    pub chosen: usize,
    /// ∂L/∂log p(chosen).
    pub logp_grad: f64,
}

/// Exact gradient of `Σ_s logp_grad_s · log p_s(chosen_s)` where p is the
/// softmax over each sample's candidate scores. Samples accumulate in index
/// order.
pub fn backward_batch(net: &MlpParams, samples: &[LogProbSample<'_>]) -> Result<Grads> {
    let mut grads = Grads::zeros_like(net);
    let mut scratch = BackpropScratch::for_net(net);
    let dim = net.input_dim();
    for s in samples {
        debug_assert_eq!(s.features.len(), s.n_candidates * dim);
        let scores: Vec<f64> = (0..s.n_candidates)
            .map(|k| net.forward_cached(&s.features[k * dim..(k + 1) * dim], &mut scratch))
            .collect();
        let dist = masked_softmax(&scores, &vec![true; s.n_candidates])?;
        // d log p(chosen) / d score_k = δ_{k,chosen} - p_k.
        for k in 0..s.n_candidates {
            let indicator = if k == s.chosen { 1.0 } else { 0.0 };
            let g = s.logp_grad * (indicator - dist.probs[k]);
            if g != 0.0 {
                let row = &s.features[k * dim..(k + 1) * dim];
                net.forward_cached(row, &mut scratch);
                net.backprop_into(row, &mut scratch, g, &mut grads);
            }
        }
    }
    Ok(grads)
}
