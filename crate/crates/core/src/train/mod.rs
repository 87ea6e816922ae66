//! Reward shaping, advantage constructions, the clipped surrogate with
//! best-checkpoint KL, exploration noise and the training loop.

mod advantage;
mod buffer;
mod loss;
mod noise;
mod parallel;
mod reward;
mod trainer;

pub use advantage::{
    delta_spread_series, discounted_returns, gae_grid, grpo_advantage_grid, ospo_episode_grid,
    ospo_step_advantage, population_stats, SIGMA_FLOOR,
};
pub use buffer::{
    run_episode, EpisodeBuffer, NoiseSpec, PhaseTimers, RolloutOptions, RolloutPolicy,
    Transition, CRITIC_DIM,
};
pub use loss::{categorical_kl, kl_score_grad, ppo_surrogate_loss, ratio_gradient_active};
pub use noise::{exploration_noise, noise_at_episode};
pub use parallel::{
    accumulate_chunked, accumulate_chunked_seq, score_rows, score_rows_seq, ChunkAcc, GRAD_CHUNK,
};
pub use reward::compute_reward;
pub use trainer::{
    evaluate, BestCheckpoint, EpisodeStats, EvalReport, Method, Trainer, TrainerConfig,
};
