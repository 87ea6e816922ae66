//! Binary-symmetric-channel exploration noise on probability scores.

use crate::matching::ScoreMatrix;
use rand::Rng;

/// Flip each finite score p → 1−p independently with probability `eps`.
/// Infeasible entries are untouched. Applied only while collecting training
/// experience, never at evaluation; `eps == 0` draws nothing.
pub fn exploration_noise(scores: &mut ScoreMatrix, eps: f64, rng: &mut impl Rng) {
    debug_assert!((0.0..=1.0).contains(&eps));
    if eps == 0.0 {
        return;
    }
    scores.for_each_feasible_mut(|p| {
        if rng.random_bool(eps) {
            *p = 1.0 - *p;
        }
    });
}

/// ε_t = max(ε₀·decay^episode, floor).
pub fn noise_at_episode(start: f64, decay: f64, floor: f64, episode: u32) -> f64 {
    (start * decay.powi(episode as i32)).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn filled(n: usize, w: usize, p: f64) -> ScoreMatrix {
        let mut m = ScoreMatrix::new(n, w);
        for i in 0..n {
            for j in 0..w {
                m.set(i, j, p);
            }
        }
        m
    }

    #[test]
    fn zero_eps_is_identity() {
        let mut m = filled(4, 5, 0.3);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        exploration_noise(&mut m, 0.0, &mut rng);
        for i in 0..4 {
            for j in 0..5 {
                assert_eq!(m.get(i, j), Some(0.3));
            }
        }
    }

    #[test]
    fn full_eps_flips_everything() {
        let mut m = filled(3, 3, 0.2);
        m.mark_infeasible(1, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        exploration_noise(&mut m, 1.0, &mut rng);
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) == (1, 1) {
                    assert_eq!(m.get(i, j), None);
                } else {
                    assert!((m.get(i, j).unwrap() - 0.8).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn flip_count_is_binomial_at_three_sigma() {
        let mut m = filled(100, 100, 0.25);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        exploration_noise(&mut m, 0.2, &mut rng);
        let mut flips = 0;
        for i in 0..100 {
            for j in 0..100 {
                if (m.get(i, j).unwrap() - 0.75).abs() < 1e-12 {
                    flips += 1;
                }
            }
        }
        let n = 10_000.0;
        let mean = n * 0.2;
        let sigma = (n * 0.2 * 0.8f64).sqrt();
        assert!((flips as f64 - mean).abs() < 3.0 * sigma, "flips = {flips}");
    }

    #[test]
    fn schedule_decays_to_floor() {
        assert_eq!(noise_at_episode(0.2, 0.5, 0.01, 0), 0.2);
        assert_eq!(noise_at_episode(0.2, 0.5, 0.01, 1), 0.1);
        assert_eq!(noise_at_episode(0.2, 0.5, 0.01, 30), 0.01);
    }
}
