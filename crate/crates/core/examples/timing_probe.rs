// quick throughput probe: one desk-scale training episode
use ridepool_core::sim::{SimConfig, OrderSource, SyntheticConfig};
use ridepool_core::train::{Trainer, TrainerConfig, Method};
use std::time::Instant;

fn main() {
    let sim = SimConfig { n_drivers: 50, horizon_steps: 30, seed: 1, ..Default::default() };
    let tcfg = TrainerConfig { method: Method::Ospo, eval_seeds: vec![1000], ..Default::default() };
    let source = OrderSource::Synthetic(SyntheticConfig { rate_per_min: 10.0, ..Default::default() });
    let mut tr = Trainer::new(sim, tcfg).unwrap();
    let t0 = Instant::now();
    for e in 0..5 {
        let s = tr.train_episode(&source).unwrap();
        println!("ep {e}: {} transitions, loss {:.4}, served {}, scoring {:.2}s match {:.2}s sim {:.2}s learn {:.2}s",
            s.n_transitions, s.loss_mean, s.train_metrics.served,
            s.rollout.scoring_s, s.rollout.matching_s, s.rollout.sim_s, s.learn_s);
    }
    println!("total for 5 episodes: {:.2}s", t0.elapsed().as_secs_f64());
}
