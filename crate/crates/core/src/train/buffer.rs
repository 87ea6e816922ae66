//! Episode rollout and experience buffering.
//!
//! One rollout drives a fresh world for `horizon_steps` decision cycles
//! under either the shared policy network or the greedy baseline,
//! returning the transitions (assigned agent-steps only), the full reward
//! grid, cumulative-reward snapshots for the δ-series, optional critic
//! inputs and the episode metrics. Buffers are immutable after the episode
//! closes.

use super::noise::exploration_noise;
use super::parallel::score_rows;
use crate::matching::{greedy_assignment, solve_assignment, GreedyDriver, ScoreMatrix};
use crate::nn::{masked_softmax, MlpParams};
use crate::rng::{stream_rng, Stream};
use crate::sim::{collect_metrics, EpisodeMetrics, OrderSource, SimConfig, World};
use crate::Result;
use std::time::Instant;

/// Critic input width: driver block + pooled order summary.
pub const CRITIC_DIM: usize = 10;

#[derive(Debug, Clone)]
pub enum RolloutPolicy<'a> {
    Net(&'a MlpParams),
    Greedy,
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub eps: f64,
    /// Training base seed; the stream is keyed by (seed, episode).
    pub seed: u64,
    pub episode: u32,
}

#[derive(Debug, Clone, Default)]
pub struct RolloutOptions {
    pub noise: Option<NoiseSpec>,
    pub collect_transitions: bool,
    pub collect_critic: bool,
}

/// One assigned agent-step. Unassigned agent-steps carry no action and are
/// never stored — they enter training only through the reward grid.
#[derive(Debug, Clone)]
pub struct Transition {
    pub agent: usize,
    pub step: u32,
    /// Candidate feature rows, flattened `n_candidates × feature_dim`.
    pub features: Vec<f64>,
    pub n_candidates: usize,
    /// Index of the assigned order within the step's candidate list.
    pub chosen: usize,
    /// π_{θ⁻}(chosen) at collection time, noise-free.
    pub old_prob: f64,
    pub reward: f64,
    pub assigned: bool,
}

/// Wall-clock split of a rollout (bench support).
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimers {
    pub scoring_s: f64,
    pub matching_s: f64,
    pub sim_s: f64,
}

#[derive(Debug, Clone)]
pub struct EpisodeBuffer {
    pub transitions: Vec<Transition>,
    /// rewards[t][agent], all agents all steps (zeros where unassigned).
    pub rewards: Vec<Vec<f64>>,
    /// cum_snapshots[t][agent] before step t; length T+1.
    pub cum_snapshots: Vec<Vec<f64>>,
    /// Flattened `[t][agent][CRITIC_DIM]` when collected, else empty.
    pub critic_inputs: Vec<f64>,
    pub metrics: EpisodeMetrics,
    pub violations: u64,
    pub timers: PhaseTimers,
}

/// Run one episode and collect experience.
pub fn run_episode(
    cfg: &SimConfig,
    source: &OrderSource,
    episode_seed: u64,
    policy: RolloutPolicy<'_>,
    opts: &RolloutOptions,
) -> Result<EpisodeBuffer> {
    let mut world = World::new(cfg.clone(), episode_seed, source.clone())?;
    let n = cfg.n_drivers;
    let dim = crate::sim::feature_dim(cfg.capacity);
    let mut noise_rng = opts
        .noise
        .filter(|s| s.eps > 0.0)
        .map(|s| stream_rng(s.seed, Stream::ExploreNoise, s.episode as u64));

    let mut buffer = EpisodeBuffer {
        transitions: Vec::new(),
        rewards: Vec::with_capacity(cfg.horizon_steps as usize),
        cum_snapshots: vec![vec![0.0; n]],
        critic_inputs: Vec::new(),
        metrics: EpisodeMetrics {
            served: 0,
            cancelled: 0,
            total_reward: 0.0,
            mean_delivery_s: None,
            mean_detour_s: None,
            mean_pickup_s: None,
            mean_confirmation_s: None,
        },
        violations: 0,
        timers: PhaseTimers::default(),
    };
    let mut features: Vec<f64> = Vec::new();

    while !world.done() {
        let step = world.step_index();
        world.begin_step();
        let candidates = world.candidates();
        let w = candidates.len();

        if opts.collect_critic {
            push_critic_inputs(&world, &candidates, &mut buffer.critic_inputs);
        }

        let outcome = match (&policy, w) {
            (_, 0) => {
                let t0 = Instant::now();
                let out = world.execute_step(&crate::matching::Assignment::default(), &[])?;
                buffer.timers.sim_s += t0.elapsed().as_secs_f64();
                out
            }
            (RolloutPolicy::Greedy, _) => {
                let t0 = Instant::now();
                let drivers: Vec<GreedyDriver> = world
                    .vehicles()
                    .iter()
                    .map(|v| GreedyDriver {
                        pos: v.pos,
                        available: v.remaining_capacity(cfg.capacity) > 0,
                    })
                    .collect();
                let origins: Vec<_> = candidates
                    .iter()
                    .map(|&id| world.order(id).origin)
                    .collect();
                let assignment = greedy_assignment(&drivers, &origins, cfg.speed_kmh);
                buffer.timers.matching_s += t0.elapsed().as_secs_f64();
                let t0 = Instant::now();
                let out = world.execute_step(&assignment, &candidates)?;
                buffer.timers.sim_s += t0.elapsed().as_secs_f64();
                out
            }
            (RolloutPolicy::Net(net), _) => {
                let t0 = Instant::now();
                let eligible: Vec<usize> = world
                    .vehicles()
                    .iter()
                    .filter(|v| v.remaining_capacity(cfg.capacity) > 0)
                    .map(|v| v.id)
                    .collect();
                features.clear();
                features.resize(eligible.len() * w * dim, 0.0);
                for (row, &driver) in eligible.iter().enumerate() {
                    for (k, &oid) in candidates.iter().enumerate() {
                        let at = (row * w + k) * dim;
                        world.encode_pair_into(driver, oid, &mut features[at..at + dim])?;
                    }
                }
                let scores = score_rows(net, &features, eligible.len(), w);

                let feasible = vec![true; w];
                let mut probs: Vec<f64> = Vec::with_capacity(eligible.len() * w);
                let mut matrix = ScoreMatrix::new(n, w);
                for (row, &driver) in eligible.iter().enumerate() {
                    let dist = masked_softmax(&scores[row * w..(row + 1) * w], &feasible)?;
                    for (k, &p) in dist.probs.iter().enumerate() {
                        matrix.set(driver, k, p);
                    }
                    probs.extend_from_slice(&dist.probs);
                }
                buffer.timers.scoring_s += t0.elapsed().as_secs_f64();

                let t0 = Instant::now();
                let mut noisy = matrix;
                if let Some(rng) = noise_rng.as_mut() {
                    exploration_noise(&mut noisy, opts.noise.unwrap().eps, rng);
                }
                let assignment = solve_assignment(&noisy);
                buffer.timers.matching_s += t0.elapsed().as_secs_f64();

                let t0 = Instant::now();
                let out = world.execute_step(&assignment, &candidates)?;
                buffer.timers.sim_s += t0.elapsed().as_secs_f64();

                if opts.collect_transitions {
                    for &(driver, k) in assignment.pairs() {
                        let row = eligible
                            .binary_search(&driver)
                            .expect("assigned driver was eligible");
                        buffer.transitions.push(Transition {
                            agent: driver,
                            step,
                            features: features[row * w * dim..(row + 1) * w * dim].to_vec(),
                            n_candidates: w,
                            chosen: k,
                            old_prob: probs[row * w + k],
                            reward: out.rewards[driver],
                            assigned: true,
                        });
                    }
                }
                out
            }
        };

        buffer.rewards.push(outcome.rewards);
        buffer.cum_snapshots.push(world.cum_rewards());
    }

    buffer.metrics = collect_metrics(&world);
    buffer.violations = world.violations();
    Ok(buffer)
}

/// Driver block + mean order block for every agent at the current step.
fn push_critic_inputs(world: &World, candidates: &[u64], out: &mut Vec<f64>) {
    let cfg = world.cfg();
    let (ex, ey) = (cfg.extent_x_km, cfg.extent_y_km);
    let horizon = cfg.episode_len_s();
    let now = world.now_s();
    let norm = world.reward_norm().max(1.0);
    let avg = world.group_avg_cum_reward() / norm;

    let mut pool = [0.0f64; 5];
    if !candidates.is_empty() {
        for &id in candidates {
            let o = world.order(id);
            pool[0] += o.origin.x / ex;
            pool[1] += o.origin.y / ey;
            pool[2] += o.dest.x / ex;
            pool[3] += o.dest.y / ey;
            pool[4] += (now - o.arrival_t).max(0.0) / horizon;
        }
        for v in &mut pool {
            *v /= candidates.len() as f64;
        }
    }
    for v in world.vehicles() {
        out.extend_from_slice(&[
            v.pos.x / ex,
            v.pos.y / ey,
            v.remaining_capacity(cfg.capacity) as f64 / cfg.capacity as f64,
            v.cum_reward / norm,
            avg,
        ]);
        out.extend_from_slice(&pool);
    }
}
