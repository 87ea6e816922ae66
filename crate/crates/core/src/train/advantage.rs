//! Critic-free advantage constructions.
//!
//! All group statistics use the population standard deviation and exclude
//! zero-reward (unassigned) samples; σ is floored at 1e-8. δ_t is the
//! population std of all agents' cumulative rewards measured immediately
//! before the step's rewards apply, and Δδ_t = δ_{t+1} − δ_t is subtracted
//! (weighted by α) to damp utility spread across the fleet.

/// σ guard against degenerate groups.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// Population mean and standard deviation.
pub fn population_stats(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Δδ_t series from per-step cumulative-reward snapshots
/// (`cum[t]` = before step t, length T+1).
pub fn delta_spread_series(cum_snapshots: &[Vec<f64>]) -> Vec<f64> {
    let stds: Vec<f64> = cum_snapshots
        .iter()
        .map(|row| population_stats(row).1)
        .collect();
    stds.windows(2).map(|w| w[1] - w[0]).collect()
}

/// One-step advantages with per-step normalisation (the OSPO form):
/// Ã_i = (r_i − μ_t)/max(σ_t, 1e-8) − α·Δδ_t over the step's assigned
/// agents. `assigned_rewards` holds the nonzero-reward samples of step t.
/// Empty input yields an empty result: the step contributes nothing.
pub fn ospo_step_advantage(assigned_rewards: &[f64], alpha: f64, delta_spread: f64) -> Vec<f64> {
    if assigned_rewards.is_empty() {
        return Vec::new();
    }
    let (mu, sigma) = population_stats(assigned_rewards);
    let denom = sigma.max(SIGMA_FLOOR);
    assigned_rewards
        .iter()
        .map(|r| (r - mu) / denom - alpha * delta_spread)
        .collect()
}

/// Episode-wide discounted advantages (the GRPO form).
///
/// μ, σ are taken over the nonzero rewards of all agents across the whole
/// episode; every step of the discounted tail contributes its normalised
/// reward, idle steps entering as (0 − μ)/σ. Returns the full `[n][T]`
/// advantage grid (computed by backward recursion); callers attach values
/// only to assigned transitions and the deviation penalty is already
/// subtracted.
pub fn grpo_advantage_grid(
    rewards: &[Vec<f64>],
    gamma: f64,
    alpha: f64,
    delta_spread: &[f64],
) -> Vec<Vec<f64>> {
    let horizon = rewards.len();
    let n = rewards.first().map_or(0, |r| r.len());
    let assigned: Vec<f64> = rewards
        .iter()
        .flat_map(|row| row.iter().copied())
        .filter(|&r| r != 0.0)
        .collect();
    let (mu, sigma) = population_stats(&assigned);
    let denom = sigma.max(SIGMA_FLOOR);

    let mut grid = vec![vec![0.0; horizon]; n];
    for (agent, row) in grid.iter_mut().enumerate() {
        let mut tail = 0.0;
        for t in (0..horizon).rev() {
            let z = (rewards[t][agent] - mu) / denom;
            tail = z + gamma * tail;
            row[t] = tail - alpha * delta_spread[t];
        }
    }
    grid
}

/// Episode-normalised one-step advantages (OSPO without the per-step
/// stats): Ã_{i,t} = (r_{i,t} − μ)/max(σ, 1e-8) − α·Δδ_t with μ, σ over the
/// episode's nonzero rewards.
pub fn ospo_episode_grid(
    rewards: &[Vec<f64>],
    alpha: f64,
    delta_spread: &[f64],
) -> Vec<Vec<f64>> {
    let horizon = rewards.len();
    let n = rewards.first().map_or(0, |r| r.len());
    let assigned: Vec<f64> = rewards
        .iter()
        .flat_map(|row| row.iter().copied())
        .filter(|&r| r != 0.0)
        .collect();
    let (mu, sigma) = population_stats(&assigned);
    let denom = sigma.max(SIGMA_FLOOR);
    let mut grid = vec![vec![0.0; horizon]; n];
    for (agent, row) in grid.iter_mut().enumerate() {
        for (t, v) in row.iter_mut().enumerate() {
            *v = (rewards[t][agent] - mu) / denom - alpha * delta_spread[t];
        }
    }
    grid
}

/// Raw discounted returns per agent (`[n][T]`): the REINFORCE signal.
pub fn discounted_returns(rewards: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let horizon = rewards.len();
    let n = rewards.first().map_or(0, |r| r.len());
    let mut grid = vec![vec![0.0; horizon]; n];
    for (agent, row) in grid.iter_mut().enumerate() {
        let mut tail = 0.0;
        for t in (0..horizon).rev() {
            tail = rewards[t][agent] + gamma * tail;
            row[t] = tail;
        }
    }
    grid
}

/// GAE(λ) advantages from per-agent value estimates (`values[t][agent]`,
/// with `values[T]` the terminal row, normally zero).
pub fn gae_grid(
    rewards: &[Vec<f64>],
    values: &[Vec<f64>],
    gamma: f64,
    lambda: f64,
) -> Vec<Vec<f64>> {
    let horizon = rewards.len();
    let n = rewards.first().map_or(0, |r| r.len());
    debug_assert_eq!(values.len(), horizon + 1);
    let mut grid = vec![vec![0.0; horizon]; n];
    for (agent, row) in grid.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in (0..horizon).rev() {
            let delta = rewards[t][agent] + gamma * values[t + 1][agent] - values[t][agent];
            acc = delta + gamma * lambda * acc;
            row[t] = acc;
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn ospo_step_matches_hand_arithmetic() {
        // rewards {2,4,6}: μ=4, population σ=√(8/3).
        let adv = ospo_step_advantage(&[2.0, 4.0, 6.0], 0.0, 0.7);
        let sigma = (8.0f64 / 3.0).sqrt();
        let expect = [-2.0 / sigma, 0.0, 2.0 / sigma];
        for (a, e) in adv.iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
        assert!((adv[0] + 1.2247).abs() < 1e-4);
    }

    #[test]
    fn equal_rewards_leave_only_the_penalty() {
        let adv = ospo_step_advantage(&[3.0, 3.0, 3.0], 0.5, 0.2);
        for a in adv {
            assert!((a - (-0.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn translated_cumulative_rewards_have_zero_spread_change() {
        // cum [1,3] -> [2,4]: δ stays 1, Δδ = 0.
        let deltas = delta_spread_series(&[vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert_eq!(deltas.len(), 1);
        assert!(deltas[0].abs() < 1e-12);
    }

    #[test]
    fn grpo_two_step_expansion() {
        // Single agent, rewards [3,5], μ=4, σ=1, γ=0.5:
        // Â₀ = (3−4) + 0.5·(5−4) = −0.5; Â₁ = 1.
        let rewards = vec![vec![3.0], vec![5.0]];
        let grid = grpo_advantage_grid(&rewards, 0.5, 0.0, &[0.0, 0.0]);
        assert!((grid[0][0] + 0.5).abs() < 1e-12);
        assert!((grid[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grpo_at_gamma_zero_equals_ospo_episode_norm() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..20 {
            let horizon = 6;
            let n = 4;
            let rewards: Vec<Vec<f64>> = (0..horizon)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.random_bool(0.6) {
                                rng.random_range(0.5..5.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let deltas: Vec<f64> = (0..horizon).map(|_| rng.random_range(-0.3..0.3)).collect();
            let a = grpo_advantage_grid(&rewards, 0.0, 0.1, &deltas);
            let b = ospo_episode_grid(&rewards, 0.1, &deltas);
            for (ra, rb) in a.iter().zip(&b) {
                for (x, y) in ra.iter().zip(rb) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn backward_recursion_matches_naive_double_loop() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..25 {
            let horizon = 5;
            let n = 3;
            let gamma: f64 = rng.random_range(0.0..1.0);
            let rewards: Vec<Vec<f64>> = (0..horizon)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..4.0)).collect())
                .collect();
            let deltas = vec![0.0; horizon];
            let grid = grpo_advantage_grid(&rewards, gamma, 0.0, &deltas);

            // Independent O(T²) evaluation of the same definition.
            let flat: Vec<f64> = rewards
                .iter()
                .flat_map(|r| r.iter().copied())
                .filter(|&r| r != 0.0)
                .collect();
            let (mu, sigma) = population_stats(&flat);
            let denom = sigma.max(SIGMA_FLOOR);
            for agent in 0..n {
                for t in 0..horizon {
                    let mut expect = 0.0;
                    for (tau, row) in rewards.iter().enumerate().skip(t) {
                        expect += gamma.powi((tau - t) as i32) * (row[agent] - mu) / denom;
                    }
                    assert!((grid[agent][t] - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn reinforce_returns_geometric_sum() {
        let rewards = vec![vec![1.0], vec![1.0], vec![1.0]];
        let g = discounted_returns(&rewards, 0.5);
        assert_eq!(g[0], vec![1.75, 1.5, 1.0]);
    }

    #[test]
    fn gae_collapses_at_the_lambda_extremes() {
        let rewards = vec![vec![1.0], vec![2.0]];
        let values = vec![vec![0.3], vec![0.6], vec![0.0]];
        // λ = 0: one-step TD residual.
        let a0 = gae_grid(&rewards, &values, 0.9, 0.0);
        assert!((a0[0][0] - (1.0 + 0.9 * 0.6 - 0.3)).abs() < 1e-12);
        assert!((a0[0][1] - (2.0 - 0.6)).abs() < 1e-12);
        // λ = 1 with V ≡ 0: plain discounted return.
        let zeros = vec![vec![0.0], vec![0.0], vec![0.0]];
        let a1 = gae_grid(&rewards, &zeros, 0.9, 1.0);
        assert!((a1[0][0] - (1.0 + 0.9 * 2.0)).abs() < 1e-12);
    }
}
