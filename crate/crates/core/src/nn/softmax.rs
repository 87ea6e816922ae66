//! Masked softmax over a driver's candidate orders.

use crate::{Error, Result};

/// Probability distribution over the feasible candidates of one driver.
/// Masked-out candidates are absent rather than carried at probability 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDistribution {
    /// Indices into the caller's candidate list, ascending.
    pub candidates: Vec<usize>,
    pub probs: Vec<f64>,
}

impl PolicyDistribution {
    /// Probability of candidate `index`, 0 if masked out.
    pub fn prob_of(&self, index: usize) -> f64 {
        match self.candidates.binary_search(&index) {
            Ok(pos) => self.probs[pos],
            Err(_) => 0.0,
        }
    }
}

/// Numerically stabilised softmax restricted to feasible entries.
/// Errors when no candidate is feasible: the driver has no action this step.
pub fn masked_softmax(scores: &[f64], feasible: &[bool]) -> Result<PolicyDistribution> {
    debug_assert_eq!(scores.len(), feasible.len());
    let mut max = f64::NEG_INFINITY;
    for (s, &ok) in scores.iter().zip(feasible) {
        if ok && *s > max {
            max = *s;
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::NoFeasibleCandidate);
    }
    let mut candidates = Vec::new();
    let mut probs = Vec::new();
    let mut sum = 0.0;
    for (k, (s, &ok)) in scores.iter().zip(feasible).enumerate() {
        if ok {
            let e = (s - max).exp();
            candidates.push(k);
            probs.push(e);
            sum += e;
        }
    }
    for p in &mut probs {
        *p /= sum;
    }
    Ok(PolicyDistribution { candidates, probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn equal_scores_split_evenly() {
        let d = masked_softmax(&[0.0, 0.0], &[true, true]).unwrap();
        assert_eq!(d.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn singleton_is_certain() {
        let d = masked_softmax(&[3.2, 9.9], &[false, true]).unwrap();
        assert_eq!(d.candidates, vec![1]);
        assert_eq!(d.probs, vec![1.0]);
        assert_eq!(d.prob_of(0), 0.0);
    }

    #[test]
    fn large_scores_stay_finite() {
        let d = masked_softmax(&[1000.0, 999.0], &[true, true]).unwrap();
        let e = 1.0f64.exp();
        assert!((d.probs[0] - e / (1.0 + e)).abs() < 1e-12);
        assert!((d.probs[1] - 1.0 / (1.0 + e)).abs() < 1e-12);
    }

    #[test]
    fn empty_feasible_set_is_an_error() {
        assert!(masked_softmax(&[1.0, 2.0], &[false, false]).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.random_range(1..12);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-30.0..30.0)).collect();
            let mask: Vec<bool> = (0..n).map(|i| i == 0 || rng.random_bool(0.7)).collect();
            let d = masked_softmax(&scores, &mask).unwrap();
            let sum: f64 = d.probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(d.probs.iter().all(|&p| p >= 0.0));
        }
    }
}
