//! Bias-corrected Adam with a per-episode learning-rate decay.

use super::{Grads, MlpParams};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Grads,
    pub v: Grads,
    pub step: u64,
    pub base_lr: f64,
    /// Multiplied by `lr_decay` once per training episode.
    pub lr_scale: f64,
    pub lr_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(net: &MlpParams, base_lr: f64, lr_decay: f64) -> Self {
        Self {
            m: Grads::zeros_like(net),
            v: Grads::zeros_like(net),
            step: 0,
            base_lr,
            lr_scale: 1.0,
            lr_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.base_lr * self.lr_scale
    }

    /// Apply the per-episode decay once.
    pub fn decay_lr(&mut self) {
        self.lr_scale *= self.lr_decay;
    }
}

/// One Adam update in place. Gradients are of the loss (descent direction).
pub fn adam_step(net: &mut MlpParams, grads: &Grads, state: &mut AdamState) {
    state.step += 1;
    let t = state.step as f64;
    let lr = state.learning_rate();
    let bc1 = 1.0 - state.beta1.powf(t);
    let bc2 = 1.0 - state.beta2.powf(t);
    for (idx, layer) in net.layers_mut().iter_mut().enumerate() {
        let (gm, gv, g) = (
            &mut state.m.layers[idx],
            &mut state.v.layers[idx],
            &grads.layers[idx],
        );
        for ((p, m), (v, grad)) in layer
            .w
            .iter_mut()
            .zip(gm.w.iter_mut())
            .zip(gv.w.iter_mut().zip(&g.w))
        {
            *m = state.beta1 * *m + (1.0 - state.beta1) * grad;
            *v = state.beta2 * *v + (1.0 - state.beta2) * grad * grad;
            *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + state.eps);
        }
        for ((p, m), (v, grad)) in layer
            .b
            .iter_mut()
            .zip(gm.b.iter_mut())
            .zip(gv.b.iter_mut().zip(&g.b))
        {
            *m = state.beta1 * *m + (1.0 - state.beta1) * grad;
            *v = state.beta2 * *v + (1.0 - state.beta2) * grad * grad;
            *p -= lr * (*m / bc1) / ((*v / bc2).sqrt() + state.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_net(w: f64) -> MlpParams {
        let mut net = MlpParams::zeros(&[1, 1]);
        net.layers_mut()[0].w[0] = w;
        net
    }

    fn grad_of(net: &MlpParams, g: f64) -> Grads {
        let mut grads = Grads::zeros_like(net);
        grads.layers[0].w[0] = g;
        grads
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        let mut net = scalar_net(1.0);
        let mut state = AdamState::new(&net, 1e-2, 1.0);
        let g = grad_of(&net, 0.3);
        adam_step(&mut net, &g, &mut state);
        // First step: m̂ = g, v̂ = g², so Δ = lr·g/(|g| + eps).
        let expected = 1.0 - 1e-2 * 0.3 / (0.3 + 1e-8);
        assert!((net.layers()[0].w[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_grad_keeps_params_and_advances_step() {
        let mut net = scalar_net(0.5);
        let mut state = AdamState::new(&net, 1e-3, 0.99);
        let g = grad_of(&net, 0.0);
        adam_step(&mut net, &g, &mut state);
        assert_eq!(net.layers()[0].w[0], 0.5);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn two_steps_match_hand_iteration() {
        // Scalar Adam trace computed independently below.
        let (b1, b2, eps, lr) = (0.9, 0.999, 1e-8, 0.1);
        let (g1, g2) = (0.5, -0.2);
        let mut w = 1.0;
        let (mut m, mut v) = (0.0, 0.0);
        for (t, g) in [(1, g1), (2, g2)] {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1f(b1, t));
            let vh = v / (1.0 - b1f(b2, t));
            w -= lr * mh / (vh.sqrt() + eps);
        }

        let mut net = scalar_net(1.0);
        let mut state = AdamState::new(&net, lr, 1.0);
        let (ga, gb) = (grad_of(&net, g1), grad_of(&net, g2));
        adam_step(&mut net, &ga, &mut state);
        adam_step(&mut net, &gb, &mut state);
        assert!((net.layers()[0].w[0] - w).abs() < 1e-15);
    }

    fn b1f(beta: f64, t: u64) -> f64 {
        beta.powf(t as f64)
    }

    #[test]
    fn lr_decay_applies_per_episode() {
        let net = scalar_net(0.0);
        let mut state = AdamState::new(&net, 1e-4, 0.99);
        state.decay_lr();
        state.decay_lr();
        assert!((state.learning_rate() - 1e-4 * 0.99 * 0.99).abs() < 1e-18);
    }
}
