//! Clipped surrogate objective and the categorical KL regulariser.

use crate::nn::PolicyDistribution;
use crate::{Error, Result};

/// Probability floor for the reference distribution inside the log.
const KL_FLOOR: f64 = 1e-12;

/// Asymmetric-clip PPO surrogate for one sample:
///
/// loss = −min(ρ·Â, clip(ρ, 1−ε, 1+ε′)·Â) + β_KL·kl
///
/// with ρ = new_prob / old_prob. Inside the trust region the clipped and
/// unclipped branches agree exactly.
pub fn ppo_surrogate_loss(
    new_prob: f64,
    old_prob: f64,
    advantage: f64,
    clip_low: f64,
    clip_high: f64,
    kl_weight: f64,
    kl_term: f64,
) -> Result<f64> {
    let ratio = new_prob / old_prob;
    if !ratio.is_finite() {
        return Err(Error::NonFinite("policy ratio"));
    }
    let clipped = ratio.clamp(1.0 - clip_low, 1.0 + clip_high);
    let surrogate = (ratio * advantage).min(clipped * advantage);
    Ok(-surrogate + kl_weight * kl_term)
}

/// Whether the surrogate gradient flows through the ratio at this sample
/// (false exactly when the clip binds in the min).
pub fn ratio_gradient_active(ratio: f64, advantage: f64, clip_low: f64, clip_high: f64) -> bool {
    !((advantage > 0.0 && ratio > 1.0 + clip_high)
        || (advantage < 0.0 && ratio < 1.0 - clip_low))
}

/// KL(p ‖ q) = Σ p ln(p/q) over a shared candidate set, with 0·ln(0/·) = 0
/// and q floored at 1e-12.
pub fn categorical_kl(p: &PolicyDistribution, q: &PolicyDistribution) -> Result<f64> {
    if p.candidates != q.candidates {
        return Err(Error::CandidateMismatch(
            p.candidates.len(),
            q.candidates.len(),
        ));
    }
    Ok(kl_from_probs(&p.probs, &q.probs))
}

/// [`categorical_kl`] on aligned probability slices.
pub fn kl_from_probs(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            kl += pi * (pi / qi.max(KL_FLOOR)).ln();
        }
    }
    kl
}

/// ∂KL(p‖q)/∂score_k = p_k (ln(p_k/q_k) − KL); used by the optimiser to
/// push the KL term through the softmax.
pub fn kl_score_grad(p: f64, q: f64, kl: f64) -> f64 {
    if p > 0.0 {
        p * ((p / q.max(KL_FLOOR)).ln() - kl)
    } else {
        0.0
    }
}
