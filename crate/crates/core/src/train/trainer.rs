//! The policy optimisation loop: GRPO and OSPO plus the IPPO/IPG ablation
//! baselines, all sharing one rollout and one clipped-surrogate optimiser.

use super::advantage::{
    delta_spread_series, discounted_returns, gae_grid, grpo_advantage_grid, ospo_episode_grid,
    ospo_step_advantage,
};
use super::buffer::{
    run_episode, EpisodeBuffer, NoiseSpec, RolloutOptions, RolloutPolicy, Transition, CRITIC_DIM,
};
use super::loss::{kl_from_probs, kl_score_grad, ppo_surrogate_loss, ratio_gradient_active};
use super::noise::noise_at_episode;
use super::parallel::{accumulate_chunked, map_indexed, score_rows, ChunkAcc};
use crate::nn::{
    adam_step, masked_softmax, AdamState, BackpropScratch, MlpParams, HIDDEN_WIDTH,
};
use crate::rng::{episode_seed, stream_rng, Stream};
use crate::sim::{feature_dim, EpisodeMetrics, OrderSource, SimConfig};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Grpo,
    Ospo,
    /// OSPO with episode-level instead of per-step normalisation.
    OspoEpisode,
    Ippo,
    Ipg,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Grpo => "grpo",
            Method::Ospo => "ospo",
            Method::OspoEpisode => "ospo-episode",
            Method::Ippo => "ippo",
            Method::Ipg => "ipg",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grpo" => Ok(Method::Grpo),
            "ospo" => Ok(Method::Ospo),
            "ospo-episode" => Ok(Method::OspoEpisode),
            "ippo" => Ok(Method::Ippo),
            "ipg" => Ok(Method::Ipg),
            other => Err(Error::Config {
                field: "method",
                reason: format!("unknown method `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainerConfig {
    pub method: Method,
    pub episodes: u32,
    pub gamma: f64,
    /// Deviation-penalty weight α.
    pub alpha: f64,
    /// Clip bounds (ε, ε′) with ε′ ≥ ε.
    pub clip_low: f64,
    pub clip_high: f64,
    /// β: weight of the KL pull toward the best checkpoint.
    pub kl_weight: f64,
    pub epochs: u32,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub explore_start: f64,
    pub explore_decay: f64,
    pub explore_floor: f64,
    /// Evaluate (and refresh the best checkpoint) every this many episodes.
    pub eval_every: u32,
    pub eval_seeds: Vec<u64>,
    pub gae_lambda: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            method: Method::Ospo,
            episodes: 1000,
            gamma: 0.95,
            alpha: 0.1,
            clip_low: 0.2,
            clip_high: 0.28,
            kl_weight: 0.01,
            epochs: 4,
            batch_size: 256,
            learning_rate: 1e-4,
            lr_decay: 0.99,
            explore_start: 0.2,
            explore_decay: 0.985,
            explore_floor: 0.01,
            eval_every: 10,
            eval_seeds: (1000..1010).collect(),
            gae_lambda: 0.95,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Error {
            Error::Config {
                field,
                reason: reason.into(),
            }
        }
        if !(self.gamma >= 0.0 && self.gamma <= 1.0) {
            return Err(bad("gamma", "must be in [0,1]"));
        }
        if !(self.alpha >= 0.0) {
            return Err(bad("alpha", "must be >= 0"));
        }
        if !(self.clip_low > 0.0) {
            return Err(bad("clip_low", "must be > 0"));
        }
        if self.clip_high < self.clip_low {
            return Err(bad("clip_high", "must be >= clip_low"));
        }
        if !(self.kl_weight >= 0.0) {
            return Err(bad("kl_weight", "must be >= 0"));
        }
        if self.epochs == 0 {
            return Err(bad("epochs", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(bad("batch_size", "must be >= 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(bad("learning_rate", "must be > 0"));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(bad("lr_decay", "must be in (0,1]"));
        }
        for (field, v) in [
            ("explore_start", self.explore_start),
            ("explore_decay", self.explore_decay),
            ("explore_floor", self.explore_floor),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(field, "must be in [0,1]"));
            }
        }
        if self.eval_every == 0 {
            return Err(bad("eval_every", "must be >= 1"));
        }
        if self.eval_seeds.is_empty() {
            return Err(bad("eval_seeds", "must not be empty"));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(bad("gae_lambda", "must be in [0,1]"));
        }
        Ok(())
    }
}

/// Best-so-far policy snapshot; doubles as the KL reference π_ref.
#[derive(Debug, Clone)]
pub struct BestCheckpoint {
    pub params: MlpParams,
    pub score: Option<f64>,
    pub episode: u32,
}

#[derive(Debug, Clone)]
pub struct EpisodeStats {
    pub episode: u32,
    pub noise_eps: f64,
    pub loss_mean: f64,
    pub kl_mean: f64,
    pub critic_loss: Option<f64>,
    pub n_transitions: usize,
    pub violations: u64,
    pub train_metrics: EpisodeMetrics,
    pub learn_s: f64,
    pub rollout: super::buffer::PhaseTimers,
}

/// Mean ± std evaluation summary over a fixed seed set.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EvalReport {
    pub rows: Vec<(u64, EpisodeMetrics)>,
    pub mean_total_reward: f64,
    pub std_total_reward: f64,
    pub mean_served: f64,
    pub mean_cancelled: f64,
    pub mean_delivery_s: Option<f64>,
    pub mean_detour_s: Option<f64>,
    pub mean_pickup_s: Option<f64>,
    pub mean_confirmation_s: Option<f64>,
    pub violations: u64,
}

impl EvalReport {
    pub fn from_rows(mut rows: Vec<(u64, EpisodeMetrics)>, violations: u64) -> Self {
        rows.sort_by_key(|(seed, _)| *seed);
        let n = rows.len().max(1) as f64;
        let totals: Vec<f64> = rows.iter().map(|(_, m)| m.total_reward).collect();
        let mean = totals.iter().sum::<f64>() / n;
        let var = totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
        let opt_mean = |get: fn(&EpisodeMetrics) -> Option<f64>| {
            let vals: Vec<f64> = rows.iter().filter_map(|(_, m)| get(m)).collect();
            if vals.is_empty() {
                None
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };
        Self {
            mean_total_reward: mean,
            std_total_reward: var.sqrt(),
            mean_served: rows.iter().map(|(_, m)| m.served as f64).sum::<f64>() / n,
            mean_cancelled: rows.iter().map(|(_, m)| m.cancelled as f64).sum::<f64>() / n,
            mean_delivery_s: opt_mean(|m| m.mean_delivery_s),
            mean_detour_s: opt_mean(|m| m.mean_detour_s),
            mean_pickup_s: opt_mean(|m| m.mean_pickup_s),
            mean_confirmation_s: opt_mean(|m| m.mean_confirmation_s),
            violations,
            rows,
        }
    }
}

/// Noise-free evaluation of a policy over the given seeds.
pub fn evaluate(
    cfg: &SimConfig,
    policy: RolloutPolicy<'_>,
    source: &OrderSource,
    seeds: &[u64],
) -> Result<EvalReport> {
    let opts = RolloutOptions::default();
    let mut rows = Vec::with_capacity(seeds.len());
    let mut violations = 0;
    for &seed in seeds {
        let buffer = run_episode(cfg, source, seed, policy.clone(), &opts)?;
        violations += buffer.violations;
        rows.push((seed, buffer.metrics));
    }
    Ok(EvalReport::from_rows(rows, violations))
}

struct Critic {
    net: MlpParams,
    adam: AdamState,
}

pub struct Trainer {
    pub sim_cfg: SimConfig,
    pub cfg: TrainerConfig,
    pub net: MlpParams,
    pub adam: AdamState,
    critic: Option<Critic>,
    pub best: BestCheckpoint,
    pub episode: u32,
}

impl Trainer {
    pub fn new(sim_cfg: SimConfig, cfg: TrainerConfig) -> Result<Self> {
        sim_cfg.validate()?;
        cfg.validate()?;
        let dim = feature_dim(sim_cfg.capacity);
        let sizes = [dim, HIDDEN_WIDTH, HIDDEN_WIDTH, HIDDEN_WIDTH, 1];
        let net = MlpParams::init(&sizes, &mut stream_rng(sim_cfg.seed, Stream::NetInit, 0));
        let adam = AdamState::new(&net, cfg.learning_rate, cfg.lr_decay);
        let critic = (cfg.method == Method::Ippo).then(|| {
            let sizes = [CRITIC_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, 1];
            let net = MlpParams::init(&sizes, &mut stream_rng(sim_cfg.seed, Stream::NetInit, 1));
            let adam = AdamState::new(&net, cfg.learning_rate, cfg.lr_decay);
            Critic { net, adam }
        });
        let best = BestCheckpoint {
            params: net.clone(),
            score: None,
            episode: 0,
        };
        Ok(Self {
            sim_cfg,
            cfg,
            net,
            adam,
            critic,
            best,
            episode: 0,
        })
    }

    pub fn noise_eps(&self) -> f64 {
        noise_at_episode(
            self.cfg.explore_start,
            self.cfg.explore_decay,
            self.cfg.explore_floor,
            self.episode,
        )
    }

    /// Collect one episode with exploration noise and run the policy
    /// optimisation epochs on it.
    pub fn train_episode(&mut self, source: &OrderSource) -> Result<EpisodeStats> {
        let eps = self.noise_eps();
        let opts = RolloutOptions {
            noise: Some(NoiseSpec {
                eps,
                seed: self.sim_cfg.seed,
                episode: self.episode,
            }),
            collect_transitions: true,
            collect_critic: self.cfg.method == Method::Ippo,
        };
        let world_seed = episode_seed(self.sim_cfg.seed, self.episode);
        let buffer = run_episode(
            &self.sim_cfg,
            source,
            world_seed,
            RolloutPolicy::Net(&self.net),
            &opts,
        )?;

        let t0 = Instant::now();
        let (loss_mean, kl_mean, critic_loss) = self.optimize(&buffer)?;
        let learn_s = t0.elapsed().as_secs_f64();
        self.adam.decay_lr();
        if let Some(c) = &mut self.critic {
            c.adam.decay_lr();
        }

        let stats = EpisodeStats {
            episode: self.episode,
            noise_eps: eps,
            loss_mean,
            kl_mean,
            critic_loss,
            n_transitions: buffer.transitions.len(),
            violations: buffer.violations,
            train_metrics: buffer.metrics.clone(),
            learn_s,
            rollout: buffer.timers,
        };
        self.episode += 1;
        Ok(stats)
    }

    /// Evaluate the live policy noise-free on the configured seeds.
    pub fn evaluate(&self, source: &OrderSource) -> Result<EvalReport> {
        evaluate(
            &self.sim_cfg,
            RolloutPolicy::Net(&self.net),
            source,
            &self.cfg.eval_seeds,
        )
    }

    /// Install the live policy as π_ref iff the eval score strictly
    /// improves on the best so far. The first evaluation always installs.
    pub fn update_best(&mut self, eval_score: f64) -> bool {
        let improved = self.best.score.is_none_or(|s| eval_score > s);
        if improved {
            self.best = BestCheckpoint {
                params: self.net.clone(),
                score: Some(eval_score),
                episode: self.episode,
            };
        }
        improved
    }

    /// Per-transition advantages for this buffer under the active method.
    fn advantages(&mut self, buffer: &EpisodeBuffer) -> Vec<f64> {
        let deltas = delta_spread_series(&buffer.cum_snapshots);
        match self.cfg.method {
            Method::Ospo => {
                // Group the step's assigned rewards, normalise per step.
                let mut adv = vec![0.0; buffer.transitions.len()];
                let mut i = 0;
                while i < buffer.transitions.len() {
                    let step = buffer.transitions[i].step;
                    let mut j = i;
                    while j < buffer.transitions.len() && buffer.transitions[j].step == step {
                        j += 1;
                    }
                    let rewards: Vec<f64> =
                        buffer.transitions[i..j].iter().map(|t| t.reward).collect();
                    let a = ospo_step_advantage(&rewards, self.cfg.alpha, deltas[step as usize]);
                    adv[i..j].copy_from_slice(&a);
                    i = j;
                }
                adv
            }
            Method::OspoEpisode => {
                let grid = ospo_episode_grid(&buffer.rewards, self.cfg.alpha, &deltas);
                per_transition(&buffer.transitions, &grid)
            }
            Method::Grpo => {
                let grid = grpo_advantage_grid(
                    &buffer.rewards,
                    self.cfg.gamma,
                    self.cfg.alpha,
                    &deltas,
                );
                per_transition(&buffer.transitions, &grid)
            }
            Method::Ipg => {
                let grid = discounted_returns(&buffer.rewards, self.cfg.gamma);
                per_transition(&buffer.transitions, &grid)
            }
            Method::Ippo => {
                let critic = self.critic.as_ref().expect("ippo has a critic");
                let horizon = buffer.rewards.len();
                let n = self.sim_cfg.n_drivers;
                let flat = score_rows(&critic.net, &buffer.critic_inputs, horizon * n, 1);
                let mut values: Vec<Vec<f64>> = (0..horizon)
                    .map(|t| flat[t * n..(t + 1) * n].to_vec())
                    .collect();
                values.push(vec![0.0; n]);
                let grid = gae_grid(
                    &buffer.rewards,
                    &values,
                    self.cfg.gamma,
                    self.cfg.gae_lambda,
                );
                per_transition(&buffer.transitions, &grid)
            }
        }
    }

    /// Optimisation epochs over the episode buffer. Returns
    /// (mean sample loss, mean KL, critic loss).
    fn optimize(&mut self, buffer: &EpisodeBuffer) -> Result<(f64, f64, Option<f64>)> {
        if buffer.transitions.is_empty() {
            return Ok((0.0, 0.0, None));
        }
        let adv = self.advantages(buffer);
        let n_t = buffer.transitions.len();
        let epochs = if self.cfg.method == Method::Ipg {
            1 // REINFORCE is strictly on-policy: a single pass.
        } else {
            self.cfg.epochs
        };
        let use_ratio = self.cfg.method != Method::Ipg;
        let kl_weight = match self.cfg.method {
            Method::Grpo | Method::Ospo | Method::OspoEpisode => self.cfg.kl_weight,
            Method::Ippo | Method::Ipg => 0.0,
        };
        // π_ref is fixed for the whole episode, so its per-transition
        // distributions are computed once, not per epoch.
        let ref_probs: Option<Vec<Vec<f64>>> = (kl_weight > 0.0).then(|| {
            let ref_net = &self.best.params;
            map_indexed(
                n_t,
                || BackpropScratch::for_net(ref_net),
                |i, scratch| {
                    let t = &buffer.transitions[i];
                    let dim = ref_net.input_dim();
                    let scores: Vec<f64> = (0..t.n_candidates)
                        .map(|k| {
                            ref_net.forward_cached(&t.features[k * dim..(k + 1) * dim], scratch)
                        })
                        .collect();
                    masked_softmax(&scores, &vec![true; t.n_candidates])
                        .expect("nonempty candidate set")
                        .probs
                },
            )
        });

        let mut shuffle_rng = stream_rng(self.sim_cfg.seed, Stream::BatchShuffle, self.episode as u64);
        let mut order: Vec<usize> = (0..n_t).collect();
        let (mut loss_sum, mut kl_sum, mut samples_seen) = (0.0, 0.0, 0usize);
        let mut critic_loss = None;

        for _ in 0..epochs {
            order.shuffle(&mut shuffle_rng);
            for batch in order.chunks(self.cfg.batch_size) {
                let net = &self.net;
                let cfg = &self.cfg;
                let adv = &adv;
                let ref_probs = &ref_probs;
                let acc = accumulate_chunked(
                    net,
                    batch.len(),
                    || SampleScratch::default(),
                    |k, acc, scratch| {
                        let idx = batch[k];
                        policy_sample_grad(
                            net,
                            &buffer.transitions[idx],
                            adv[idx],
                            ref_probs.as_ref().map(|q| q[idx].as_slice()),
                            cfg.clip_low,
                            cfg.clip_high,
                            kl_weight,
                            use_ratio,
                            batch.len(),
                            acc,
                            scratch,
                        );
                    },
                );
                if !acc.loss_sum.is_finite() {
                    return Err(Error::NonFinite("batch loss"));
                }
                adam_step(&mut self.net, &acc.grads, &mut self.adam);
                loss_sum += acc.loss_sum;
                kl_sum += acc.kl_sum;
                samples_seen += batch.len();
            }
            if self.cfg.method == Method::Ippo {
                critic_loss = Some(self.critic_epoch(buffer)?);
            }
        }
        Ok((
            loss_sum / samples_seen as f64,
            kl_sum / samples_seen as f64,
            critic_loss,
        ))
    }

    /// One full-batch critic regression toward discounted returns.
    fn critic_epoch(&mut self, buffer: &EpisodeBuffer) -> Result<f64> {
        let critic = self.critic.as_mut().expect("ippo has a critic");
        let returns = discounted_returns(&buffer.rewards, self.cfg.gamma);
        let n = self.sim_cfg.n_drivers;
        let horizon = buffer.rewards.len();
        let n_items = n * horizon;
        let net = &critic.net;
        let inputs = &buffer.critic_inputs;
        let acc = accumulate_chunked(
            net,
            n_items,
            || BackpropScratch::for_net(net),
            |item, acc, scratch| {
                let (t, agent) = (item / n, item % n);
                let x = &inputs[item * CRITIC_DIM..(item + 1) * CRITIC_DIM];
                let v = net.forward_cached(x, scratch);
                let err = v - returns[agent][t];
                acc.loss_sum += err * err;
                net.backprop_into(x, scratch, 2.0 * err / n_items as f64, &mut acc.grads);
            },
        );
        if !acc.loss_sum.is_finite() {
            return Err(Error::NonFinite("critic loss"));
        }
        adam_step(&mut critic.net, &acc.grads, &mut critic.adam);
        Ok(acc.loss_sum / n_items as f64)
    }
}

/// Per-thread working set for the policy gradient: one activation cache per
/// candidate so backprop reuses the scoring pass instead of re-running it.
#[derive(Default)]
struct SampleScratch {
    caches: Vec<BackpropScratch>,
    scores: Vec<f64>,
}

/// Grid lookup for per-transition advantages.
fn per_transition(transitions: &[Transition], grid: &[Vec<f64>]) -> Vec<f64> {
    transitions
        .iter()
        .map(|t| grid[t.agent][t.step as usize])
        .collect()
}

/// Accumulate one transition's loss gradient in score space.
#[allow(clippy::too_many_arguments)]
fn policy_sample_grad(
    net: &MlpParams,
    sample: &Transition,
    advantage: f64,
    ref_probs: Option<&[f64]>,
    clip_low: f64,
    clip_high: f64,
    kl_weight: f64,
    use_ratio: bool,
    batch_len: usize,
    acc: &mut ChunkAcc,
    scratch: &mut SampleScratch,
) {
    let dim = net.input_dim();
    let w = sample.n_candidates;
    while scratch.caches.len() < w {
        scratch.caches.push(BackpropScratch::for_net(net));
    }
    scratch.scores.clear();
    for k in 0..w {
        let row = &sample.features[k * dim..(k + 1) * dim];
        scratch
            .scores
            .push(net.forward_cached(row, &mut scratch.caches[k]));
    }
    let dist = masked_softmax(&scratch.scores, &vec![true; w]).expect("nonempty candidate set");
    let p_chosen = dist.probs[sample.chosen];
    let scale = 1.0 / batch_len as f64;
    let kl = ref_probs.map_or(0.0, |q| kl_from_probs(&dist.probs, q));

    if use_ratio {
        let ratio = p_chosen / sample.old_prob;
        acc.loss_sum += ppo_surrogate_loss(
            p_chosen,
            sample.old_prob,
            advantage,
            clip_low,
            clip_high,
            kl_weight,
            kl,
        )
        .unwrap_or(f64::NAN);
        acc.kl_sum += kl;
        let active = ratio_gradient_active(ratio, advantage, clip_low, clip_high);
        for k in 0..w {
            let indicator = if k == sample.chosen { 1.0 } else { 0.0 };
            let mut g = 0.0;
            if active {
                g -= advantage * ratio * (indicator - dist.probs[k]);
            }
            if let Some(q) = ref_probs {
                g += kl_weight * kl_score_grad(dist.probs[k], q[k], kl);
            }
            g *= scale;
            if g != 0.0 {
                let row = &sample.features[k * dim..(k + 1) * dim];
                net.backprop_into(row, &mut scratch.caches[k], g, &mut acc.grads);
            }
        }
    } else {
        // REINFORCE: loss = −log π(chosen) · G.
        acc.loss_sum += -p_chosen.ln() * advantage;
        for k in 0..w {
            let indicator = if k == sample.chosen { 1.0 } else { 0.0 };
            let g = -advantage * (indicator - dist.probs[k]) * scale;
            if g != 0.0 {
                let row = &sample.features[k * dim..(k + 1) * dim];
                net.backprop_into(row, &mut scratch.caches[k], g, &mut acc.grads);
            }
        }
    }
}
