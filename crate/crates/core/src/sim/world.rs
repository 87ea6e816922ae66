//! The episode state machine.
//!
//! Each step runs: `begin_step` (spawn the window's arrivals, expire stale
//! orders) → caller scores the visible pool and picks an [`Assignment`] →
//! `execute_step` (route insertions, rewards, one `step_len` of motion,
//! bookkeeping). Structural invariants are audited after every step into a
//! violation counter instead of panicking mid-run.

use super::{encode, Order, OrderStatus, SimConfig, VehicleState};
use crate::matching::Assignment;
use crate::rng::{stream_rng, Stream};
use crate::routing::{advance_route, best_insertion, Point, StopKind};
use crate::sim::OrderSource;
use crate::train::compute_reward;
use crate::{Error, Result};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Per-agent reward for this step; zero for unassigned agents.
    pub rewards: Vec<f64>,
    pub pickups: u32,
    pub dropoffs: u32,
}

#[derive(Debug, Clone)]
pub struct World {
    cfg: SimConfig,
    seed: u64,
    source: OrderSource,
    t: u32,
    begun: bool,
    vehicles: Vec<VehicleState>,
    orders: Vec<Order>,
    /// Ids of pending orders (includes not-yet-visible replay arrivals).
    pool: Vec<u64>,
    cancelled: u32,
    total_reward: f64,
    /// Running max of |cum_reward| across agents, for feature scaling.
    reward_norm: f64,
    violations: u64,
    violation_notes: Vec<String>,
}

impl World {
    pub fn new(cfg: SimConfig, seed: u64, source: OrderSource) -> Result<Self> {
        cfg.validate()?;
        let mut rng = stream_rng(seed, Stream::VehicleInit, 0);
        let vehicles = (0..cfg.n_drivers)
            .map(|id| {
                let pos = Point::new(
                    rng.random_range(0.0..cfg.extent_x_km),
                    rng.random_range(0.0..cfg.extent_y_km),
                );
                VehicleState::new(id, pos)
            })
            .collect();
        Ok(Self {
            cfg,
            seed,
            source,
            t: 0,
            begun: false,
            vehicles,
            orders: Vec::new(),
            pool: Vec::new(),
            cancelled: 0,
            total_reward: 0.0,
            reward_norm: 1.0,
            violations: 0,
            violation_notes: Vec::new(),
        })
    }

    pub fn cfg(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_index(&self) -> u32 {
        self.t
    }

    pub fn now_s(&self) -> f64 {
        self.t as f64 * self.cfg.step_len_s
    }

    pub fn done(&self) -> bool {
        self.t >= self.cfg.horizon_steps
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn order(&self, id: u64) -> &Order {
        &self.orders[id as usize]
    }

    pub fn spawned_count(&self) -> usize {
        self.orders.len()
    }

    pub fn cancelled_count(&self) -> u32 {
        self.cancelled
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    pub fn reward_norm(&self) -> f64 {
        self.reward_norm
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }

    pub fn violation_notes(&self) -> &[String] {
        &self.violation_notes
    }

    /// Mean cumulative reward across the fleet.
    pub fn group_avg_cum_reward(&self) -> f64 {
        let n = self.vehicles.len().max(1) as f64;
        self.vehicles.iter().map(|v| v.cum_reward).sum::<f64>() / n
    }

    /// Cumulative reward per agent (δ-series input for the trainers).
    pub fn cum_rewards(&self) -> Vec<f64> {
        self.vehicles.iter().map(|v| v.cum_reward).collect()
    }

    /// Spawn this step's arrivals and expire stale pending orders.
    pub fn begin_step(&mut self) -> (usize, usize) {
        assert!(!self.begun, "begin_step called twice for step {}", self.t);
        assert!(!self.done(), "episode is over");
        let specs = self.source.spawn(self.t, &self.cfg, self.seed);
        let spawned = specs.len();
        for spec in specs {
            let id = self.orders.len() as u64;
            self.orders.push(Order::new(
                id,
                spec.origin,
                spec.dest,
                spec.arrival_s,
                self.cfg.speed_kmh,
            ));
            self.pool.push(id);
        }
        let expired = self.expire_orders();
        self.begun = true;
        (spawned, expired)
    }

    /// Cancel pending orders that waited longer than `max_wait_s`.
    fn expire_orders(&mut self) -> usize {
        let now = self.now_s();
        let expired = expire_pending(&mut self.orders, &mut self.pool, now, self.cfg.max_wait_s);
        self.cancelled += expired as u32;
        expired
    }

    /// Pending orders assignable this step (arrived by now), in
    /// (arrival, id) order. Index into this list = matching column.
    pub fn candidates(&self) -> Vec<u64> {
        let now = self.now_s();
        self.pool
            .iter()
            .copied()
            .filter(|&id| self.orders[id as usize].arrival_t <= now)
            .collect()
    }

    /// Encode the (driver, order) pair feature vector at the current step.
    pub fn encode_pair_into(&self, driver: usize, order_id: u64, out: &mut [f64]) -> Result<()> {
        encode::encode_pair(
            &self.cfg,
            &self.vehicles[driver],
            &self.orders[order_id as usize],
            &self.orders,
            self.group_avg_cum_reward(),
            self.reward_norm,
            self.now_s(),
            out,
        )
    }

    /// Execute an assignment over `candidate_ids` (as returned by
    /// [`World::candidates`]), then advance every vehicle one step.
    pub fn execute_step(
        &mut self,
        assignment: &Assignment,
        candidate_ids: &[u64],
    ) -> Result<StepOutcome> {
        assert!(self.begun, "execute_step before begin_step");
        let t_now = self.now_s();
        let n = self.vehicles.len();
        let mut rewards = vec![0.0; n];

        let mut seen_driver = vec![false; n];
        let mut seen_order = vec![false; candidate_ids.len()];
        for &(i, j) in assignment.pairs() {
            if i >= n || j >= candidate_ids.len() {
                return Err(Error::InvalidAssignment(format!(
                    "pair ({i},{j}) out of bounds"
                )));
            }
            if seen_driver[i] || seen_order[j] {
                return Err(Error::InvalidAssignment(format!(
                    "degree constraint violated at ({i},{j})"
                )));
            }
            seen_driver[i] = true;
            seen_order[j] = true;
            let oid = candidate_ids[j];
            let order = &self.orders[oid as usize];
            if order.status != OrderStatus::Pending || order.arrival_t > t_now {
                return Err(Error::InvalidAssignment(format!(
                    "order {oid} not assignable"
                )));
            }
            let vehicle = &self.vehicles[i];
            if vehicle.remaining_capacity(self.cfg.capacity) == 0 {
                return Err(Error::InvalidAssignment(format!("driver {i} is full")));
            }

            let insertion = best_insertion(
                &vehicle.route,
                vehicle.pos,
                t_now,
                oid,
                order.origin,
                order.dest,
                self.cfg.speed_kmh,
            );
            rewards[i] = compute_reward(&insertion, order.direct_km, &self.cfg);

            let order = &mut self.orders[oid as usize];
            order.status = OrderStatus::Assigned;
            order.assigned_t = Some(t_now);
            order.scheduled_dropoff = Some(insertion.new_order_eta);
            let vehicle = &mut self.vehicles[i];
            vehicle.route = insertion.new_route;
            vehicle.assigned.push(oid);
            self.pool.retain(|&id| id != oid);
        }

        let (mut pickups, mut dropoffs) = (0u32, 0u32);
        for vehicle in &mut self.vehicles {
            let events = advance_route(
                &mut vehicle.pos,
                &mut vehicle.route,
                t_now,
                self.cfg.step_len_s,
                self.cfg.speed_kmh,
            );
            for event in events {
                let order = &mut self.orders[event.order_id as usize];
                match event.kind {
                    StopKind::Pickup => {
                        order.status = OrderStatus::Onboard;
                        order.pickup_t = Some(event.time);
                        vehicle.assigned.retain(|&id| id != event.order_id);
                        vehicle.onboard.push(event.order_id);
                        pickups += 1;
                    }
                    StopKind::Dropoff => {
                        order.status = OrderStatus::Completed;
                        order.dropoff_t = Some(event.time);
                        vehicle.onboard.retain(|&id| id != event.order_id);
                        dropoffs += 1;
                    }
                }
            }
        }

        for (vehicle, &r) in self.vehicles.iter_mut().zip(&rewards) {
            vehicle.cum_reward += r;
            self.total_reward += r;
        }
        let max_abs = self
            .vehicles
            .iter()
            .fold(0.0f64, |m, v| m.max(v.cum_reward.abs()));
        self.reward_norm = self.reward_norm.max(max_abs);

        self.begun = false;
        self.t += 1;
        self.audit();
        Ok(StepOutcome {
            rewards,
            pickups,
            dropoffs,
        })
    }

    fn note_violation(&mut self, note: String) {
        self.violations += 1;
        if self.violation_notes.len() < 8 {
            self.violation_notes.push(note);
        }
    }

    /// Structural invariant sweep; increments the violation counter.
    fn audit(&mut self) {
        let capacity = self.cfg.capacity as usize;
        let mut notes: Vec<String> = Vec::new();
        for v in &self.vehicles {
            if v.onboard.len() > capacity {
                notes.push(format!("vehicle {} over capacity", v.id));
            }
            if v.onboard.len() + v.assigned.len() > capacity {
                notes.push(format!("vehicle {} over-committed", v.id));
            }
            for &oid in &v.onboard {
                let drops = v
                    .route
                    .stops
                    .iter()
                    .filter(|s| s.kind == StopKind::Dropoff && s.order_id == oid)
                    .count();
                if drops != 1 {
                    notes.push(format!("vehicle {} onboard order {oid} has {drops} dropoffs", v.id));
                }
            }
            if !v.route.is_valid() {
                notes.push(format!("vehicle {} route invalid", v.id));
            }
        }
        let mut counted = self.cancelled as usize;
        for o in &self.orders {
            match o.status {
                OrderStatus::Cancelled => {}
                _ => counted += 1,
            }
            if o.status == OrderStatus::Completed {
                let ts: Vec<f64> = o.timeline().collect();
                if ts.len() != 4 || ts.windows(2).any(|w| w[0] > w[1]) {
                    notes.push(format!("order {} timestamps not monotone", o.id));
                }
                let delivery = o.dropoff_t.unwrap() - o.pickup_t.unwrap();
                if delivery < o.direct_time_s - 1e-6 {
                    notes.push(format!("order {} faster than direct", o.id));
                }
            }
        }
        if counted != self.orders.len() {
            notes.push(format!(
                "conservation: {} counted vs {} spawned",
                counted,
                self.orders.len()
            ));
        }
        for n in notes {
            self.note_violation(n);
        }
    }
}

/// Mark pool orders waiting strictly longer than `max_wait` as cancelled
/// and drop them from the pool. Returns the number cancelled.
pub fn expire_pending(orders: &mut [Order], pool: &mut Vec<u64>, t_now: f64, max_wait: f64) -> usize {
    let mut expired = 0;
    pool.retain(|&id| {
        let o = &mut orders[id as usize];
        if t_now - o.arrival_t > max_wait {
            o.status = OrderStatus::Cancelled;
            expired += 1;
            false
        } else {
            true
        }
    });
    expired
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{OrderSpec, SyntheticConfig};

    fn small_cfg() -> SimConfig {
        SimConfig {
            n_drivers: 2,
            seed: 3,
            ..Default::default()
        }
    }

    fn replay_world(cfg: &SimConfig, specs: Vec<OrderSpec>) -> World {
        World::new(cfg.clone(), cfg.seed, OrderSource::replay(specs)).unwrap()
    }

    #[test]
    fn empty_assignment_is_a_no_op_for_rewards() {
        let cfg = small_cfg();
        let mut world = replay_world(&cfg, vec![]);
        world.begin_step();
        let out = world
            .execute_step(&Assignment::default(), &[])
            .unwrap();
        assert!(out.rewards.iter().all(|&r| r == 0.0));
        assert_eq!(out.rewards.len(), 2);
        assert_eq!(world.violations(), 0);
    }

    #[test]
    fn single_order_is_picked_up_and_delivered_on_schedule() {
        // Driver 0 sits at the order origin; direct time is 120 s, so the
        // pickup fires immediately and the dropoff two steps later.
        let cfg = SimConfig {
            n_drivers: 1,
            seed: 9,
            ..Default::default()
        };
        let mut world = replay_world(
            &cfg,
            vec![OrderSpec {
                arrival_s: 0.0,
                origin: Point::new(0.0, 0.0),
                dest: Point::new(1.0, 1.0),
            }],
        );
        // Park the driver exactly on the origin.
        world.vehicles[0].pos = Point::new(0.0, 0.0);

        world.begin_step();
        let cands = world.candidates();
        assert_eq!(cands, vec![0]);
        let out = world
            .execute_step(&Assignment::from_pairs(vec![(0, 0)]), &cands)
            .unwrap();
        assert!(out.rewards[0] > 0.0);
        assert_eq!(out.pickups, 1);
        assert_eq!(world.order(0).pickup_t, Some(0.0));

        world.begin_step();
        world.execute_step(&Assignment::default(), &[]).unwrap();
        assert_eq!(world.order(0).status, OrderStatus::Completed);
        assert_eq!(world.order(0).dropoff_t, Some(120.0));
        assert_eq!(world.violations(), 0);
        // Scheduled dropoff was frozen at assignment and met exactly.
        assert_eq!(world.order(0).scheduled_dropoff, Some(120.0));
    }

    #[test]
    fn expiry_predicate_sweep() {
        // Spec sweep: arrivals {0,60,...,240}, t_now = 400, max_wait = 300
        // cancels exactly the arrivals at 0 and 60.
        let mut orders: Vec<Order> = [0.0, 60.0, 120.0, 180.0, 240.0]
            .iter()
            .enumerate()
            .map(|(id, &arr)| {
                Order::new(id as u64, Point::new(0.0, 0.0), Point::new(1.0, 0.0), arr, 60.0)
            })
            .collect();
        let mut pool: Vec<u64> = (0..5).collect();
        let expired = expire_pending(&mut orders, &mut pool, 400.0, 300.0);
        assert_eq!(expired, 2);
        assert_eq!(pool, vec![2, 3, 4]);
        assert_eq!(orders[0].status, OrderStatus::Cancelled);
        assert_eq!(orders[1].status, OrderStatus::Cancelled);
        assert_eq!(orders[2].status, OrderStatus::Pending);
        // Boundary cases: under and just over the threshold.
        let mut orders = vec![Order::new(0, Point::new(0.0, 0.0), Point::new(1.0, 0.0), 0.0, 60.0)];
        let mut pool = vec![0];
        assert_eq!(expire_pending(&mut orders, &mut pool, 100.0, 300.0), 0);
        assert_eq!(expire_pending(&mut orders, &mut pool, 300.0, 300.0), 0);
        assert_eq!(expire_pending(&mut orders, &mut pool, 301.0, 300.0), 1);
    }

    #[test]
    fn world_expires_overdue_orders_as_steps_pass() {
        let cfg = SimConfig {
            n_drivers: 1,
            max_wait_s: 300.0,
            ..Default::default()
        };
        let specs: Vec<OrderSpec> = [0.0, 60.0, 120.0, 180.0, 240.0]
            .iter()
            .map(|&arrival_s| OrderSpec {
                arrival_s,
                origin: Point::new(0.0, 0.0),
                dest: Point::new(1.0, 0.0),
            })
            .collect();
        let mut world = replay_world(&cfg, specs);
        // Steps 0..=7 with no assignments; by t=420 s the arrivals at 0
        // (age 420) and 60 (age 360) are over the 300 s wait, while the
        // 120 s arrival sits exactly at the threshold and survives.
        for _ in 0..8 {
            world.begin_step();
            world.execute_step(&Assignment::default(), &[]).unwrap();
        }
        assert_eq!(world.cancelled_count(), 2);
        assert_eq!(world.order(0).status, OrderStatus::Cancelled);
        assert_eq!(world.order(1).status, OrderStatus::Cancelled);
        assert_eq!(world.order(2).status, OrderStatus::Pending);
    }

    #[test]
    fn mid_window_replay_arrival_not_assignable_until_visible() {
        let cfg = SimConfig {
            n_drivers: 1,
            ..Default::default()
        };
        let mut world = replay_world(
            &cfg,
            vec![OrderSpec {
                arrival_s: 61.0,
                origin: Point::new(0.0, 0.0),
                dest: Point::new(1.0, 0.0),
            }],
        );
        world.begin_step(); // step 0: window [0,60) — nothing spawns
        assert!(world.candidates().is_empty());
        world.execute_step(&Assignment::default(), &[]).unwrap();
        world.begin_step(); // step 1: spawns, but 61 > 60 keeps it hidden
        assert!(world.candidates().is_empty());
        world.execute_step(&Assignment::default(), &[]).unwrap();
        world.begin_step(); // step 2: visible now
        assert_eq!(world.candidates().len(), 1);
    }

    #[test]
    fn constraint_violations_are_hard_failures() {
        let cfg = small_cfg();
        let mut world = replay_world(
            &cfg,
            vec![
                OrderSpec {
                    arrival_s: 0.0,
                    origin: Point::new(0.0, 0.0),
                    dest: Point::new(1.0, 0.0),
                },
                OrderSpec {
                    arrival_s: 0.0,
                    origin: Point::new(2.0, 0.0),
                    dest: Point::new(3.0, 0.0),
                },
            ],
        );
        world.begin_step();
        let cands = world.candidates();
        // Driver 0 takes both orders: violates constraint 5c.
        let bad = Assignment::from_pairs(vec![(0, 0), (0, 1)]);
        assert!(world.execute_step(&bad, &cands).is_err());
    }

    #[test]
    fn synthetic_episodes_are_deterministic() {
        let cfg = SimConfig {
            n_drivers: 5,
            seed: 11,
            ..Default::default()
        };
        let syn = SyntheticConfig {
            rate_per_min: 4.0,
            ..Default::default()
        };
        let run = || {
            let mut world =
                World::new(cfg.clone(), 11, OrderSource::Synthetic(syn.clone())).unwrap();
            let mut trace = Vec::new();
            while !world.done() {
                world.begin_step();
                let cands = world.candidates();
                // Deterministic dummy policy: first driver with a seat
                // takes the first candidate.
                let mut pairs = Vec::new();
                if let Some(&oid) = cands.first() {
                    if let Some(v) = world
                        .vehicles()
                        .iter()
                        .find(|v| v.remaining_capacity(cfg.capacity) > 0)
                    {
                        pairs.push((v.id, 0));
                        let _ = oid;
                    }
                }
                let out = world
                    .execute_step(&Assignment::from_pairs(pairs), &cands)
                    .unwrap();
                trace.push(out.rewards);
            }
            (trace, crate::sim::collect_metrics(&world))
        };
        let (trace_a, metrics_a) = run();
        let (trace_b, metrics_b) = run();
        assert_eq!(trace_a, trace_b);
        assert_eq!(metrics_a, metrics_b);
    }
}
