//! Shared pair-scoring policy network: a four-layer MLP (LeakyReLU hidden
//! activations, linear scalar output) with hand-rolled exact
//! backpropagation, Adam, and a binary checkpoint format. Everything runs
//! in f64 for bit-reproducible training.

mod adam;
mod backward;
mod checkpoint;
mod softmax;

pub use adam::{adam_step, AdamState};
pub use backward::{backward_batch, BackpropScratch, Grads, LogProbSample};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta};
pub use softmax::{masked_softmax, PolicyDistribution};

use crate::{Error, Result};
use rand::Rng;

/// Negative slope of the hidden LeakyReLU activations.
pub const LEAKY_SLOPE: f64 = 0.01;

/// Hidden width used by the default policy and critic networks.
pub const HIDDEN_WIDTH: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Row-major weights, `out_dim` rows of `in_dim`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// MLP weights. Three instances circulate during training: the live policy,
/// the rollout snapshot and the best checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<LayerParams>,
}

impl MlpParams {
    /// He-style uniform fan-in initialisation, biases zero.
    pub fn init(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|pair| {
                let (in_dim, out_dim) = (pair[0], pair[1]);
                let bound = (6.0 / in_dim as f64).sqrt();
                let w = (0..in_dim * out_dim)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                LayerParams {
                    w,
                    b: vec![0.0; out_dim],
                    in_dim,
                    out_dim,
                }
            })
            .collect();
        Self { layers }
    }

    /// All-zero network with the given layer sizes.
    pub fn zeros(sizes: &[usize]) -> Self {
        let layers = sizes
            .windows(2)
            .map(|pair| LayerParams {
                w: vec![0.0; pair[0] * pair[1]],
                b: vec![0.0; pair[1]],
                in_dim: pair[0],
                out_dim: pair[1],
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<LayerParams>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Layer sizes including input and output, e.g. `[25, 128, 128, 128, 1]`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].in_dim];
        s.extend(self.layers.iter().map(|l| l.out_dim));
        s
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Scalar score for one feature vector; checks the input dimension.
    pub fn score(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: features.len(),
            });
        }
        let mut scratch = Scratch::for_net(self);
        Ok(self.forward_into(features, &mut scratch))
    }

    /// Hot-path forward pass; caller supplies scratch sized by
    /// [`Scratch::for_net`]. Input dimension is only debug-checked.
    pub fn forward_into(&self, features: &[f64], scratch: &mut Scratch) -> f64 {
        debug_assert_eq!(features.len(), self.input_dim());
        let n_layers = self.layers.len();
        let Scratch { a, b } = scratch;
        for (idx, layer) in self.layers.iter().enumerate() {
            let (src, dst): (&[f64], &mut [f64]) = if idx == 0 {
                (features, a)
            } else if idx % 2 == 1 {
                (&a[..layer.in_dim], b)
            } else {
                (&b[..layer.in_dim], a)
            };
            affine(layer, src, dst);
            if idx + 1 < n_layers {
                for v in dst.iter_mut().take(layer.out_dim) {
                    if *v < 0.0 {
                        *v *= LEAKY_SLOPE;
                    }
                }
            }
        }
        if (n_layers - 1) % 2 == 0 {
            a[0]
        } else {
            b[0]
        }
    }
}

/// y = W x + b into `out[..out_dim]`.
fn affine(layer: &LayerParams, x: &[f64], out: &mut [f64]) {
    for (o, y) in out.iter_mut().take(layer.out_dim).enumerate() {
        let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
        let mut acc = layer.b[o];
        for (w, v) in row.iter().zip(x) {
            acc += w * v;
        }
        *y = acc;
    }
}

/// Two ping-pong buffers wide enough for any layer of a given net.
#[derive(Debug, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Scratch {
    pub fn for_net(net: &MlpParams) -> Self {
        let width = net.layers.iter().map(|l| l.out_dim).max().unwrap_or(1);
        Self {
            a: vec![0.0; width],
            b: vec![0.0; width],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_network_scores_zero() {
        let net = MlpParams::zeros(&[4, 3, 1]);
        assert_eq!(net.score(&[1.0, -2.0, 0.5, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_two_layer_chain() {
        // 2 -> 2 -> 1, weights chosen so the chain is easy to follow.
        let mut net = MlpParams::zeros(&[2, 2, 1]);
        net.layers_mut()[0].w = vec![1.0, 0.0, 0.0, -1.0];
        net.layers_mut()[0].b = vec![0.5, 0.0];
        net.layers_mut()[1].w = vec![2.0, 3.0];
        net.layers_mut()[1].b = vec![-1.0];
        // x = (1, 2): z1 = (1.5, -2), a1 = (1.5, -0.02), y = 3 - 0.06 - 1.
        let y = net.score(&[1.0, 2.0]).unwrap();
        assert!((y - 1.94).abs() < 1e-12);
    }

    #[test]
    fn leaky_relu_negative_slope() {
        // Single hidden unit passes -1 through the activation.
        let mut net = MlpParams::zeros(&[1, 1, 1]);
        net.layers_mut()[0].w = vec![1.0];
        net.layers_mut()[1].w = vec![1.0];
        let y = net.score(&[-1.0]).unwrap();
        assert!((y - (-0.01)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = MlpParams::zeros(&[4, 3, 1]);
        assert!(net.score(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let net = MlpParams::init(&[10, 16, 16, 16, 1], &mut rng);
        let x: Vec<f64> = (0..10).map(|i| (i as f64) * 0.1 - 0.4).collect();
        let a = net.score(&x).unwrap();
        let b = net.score(&x).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
    }

    #[test]
    fn init_is_seed_stable() {
        let a = MlpParams::init(&[5, 8, 1], &mut ChaCha12Rng::seed_from_u64(9));
        let b = MlpParams::init(&[5, 8, 1], &mut ChaCha12Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
