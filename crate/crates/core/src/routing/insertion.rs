//! Exact route re-optimisation for a single order insertion.
//!
//! Inserting an order re-sequences the whole stop set: every
//! precedence-valid ordering of {existing stops, new pickup, new dropoff}
//! is enumerated (branch-and-bound) and the minimum-total-time route wins.
//! Ties fall to the route that disturbs the previous stop order least, then
//! to the earlier new-order pickup, then to a lexicographic stop key.
//! Routes larger than [`MAX_EXACT_STOPS`] fall back to cheapest insertion
//! (existing order kept fixed); with capacity 3 the exact path always runs.

use super::{travel_time_s, Point, RoutePlan, Stop, StopKind};

/// Largest stop count (existing + 2 new) handled by exact enumeration.
pub const MAX_EXACT_STOPS: usize = 8;

/// Outcome of inserting one order into a route.
#[derive(Debug, Clone)]
pub struct InsertionResult {
    pub new_route: RoutePlan,
    /// Seconds added to the vehicle's route completion time.
    pub added_vehicle_time_s: f64,
    /// Sum over en-route orders of dropoff delay, clamped at 0 per order (ρ).
    pub added_passenger_time_s: f64,
    /// En-route orders whose new ETA exceeds their frozen scheduled dropoff (χ).
    pub late_count: u32,
    /// Km added to the vehicle's route.
    pub added_vehicle_km: f64,
    /// Dropoff ETA of the newly inserted order.
    pub new_order_eta: f64,
}

#[derive(Clone, Copy)]
struct Item {
    loc: Point,
    kind: StopKind,
    order_id: u64,
    /// Index within the pre-insertion route; None for the two new stops.
    old_index: Option<usize>,
    deadline: Option<f64>,
    /// Item index of the stop that must precede this one, if any.
    predecessor: Option<usize>,
}

struct Search<'a> {
    items: &'a [Item],
    now: f64,
    speed_kmh: f64,
    old_index_count: usize,
    best_seq: Vec<usize>,
    best_total: f64,
    best_disp: usize,
    best_pickup_eta: f64,
    best_lex: Vec<(u64, u8)>,
}

impl Search<'_> {
    fn run(&mut self, pos: Point) {
        let mut seq = Vec::with_capacity(self.items.len());
        let mut used = vec![false; self.items.len()];
        self.dfs(&mut seq, &mut used, pos, self.now, f64::INFINITY);
    }

    fn dfs(&mut self, seq: &mut Vec<usize>, used: &mut [bool], pos: Point, t: f64, pickup_eta: f64) {
        if seq.len() == self.items.len() {
            self.offer(seq, t, pickup_eta);
            return;
        }
        for i in 0..self.items.len() {
            if used[i] {
                continue;
            }
            if let Some(p) = self.items[i].predecessor {
                if !used[p] {
                    continue;
                }
            }
            let leg = travel_time_s(pos, self.items[i].loc, self.speed_kmh);
            let t_next = t + leg;
            if t_next > self.best_total {
                continue;
            }
            let pe = if self.items[i].old_index.is_none() && self.items[i].kind == StopKind::Pickup
            {
                t_next
            } else {
                pickup_eta
            };
            used[i] = true;
            seq.push(i);
            self.dfs(seq, used, self.items[i].loc, t_next, pe);
            seq.pop();
            used[i] = false;
        }
    }

    fn offer(&mut self, seq: &[usize], total: f64, pickup_eta: f64) {
        if total > self.best_total {
            return;
        }
        let strictly_better = total < self.best_total;
        let disp = if strictly_better {
            self.displacement(seq)
        } else {
            // Tie on total time: compare the full key.
            let d = self.displacement(seq);
            if d > self.best_disp {
                return;
            }
            if d == self.best_disp {
                if pickup_eta > self.best_pickup_eta {
                    return;
                }
                if pickup_eta == self.best_pickup_eta && self.lex_key(seq) >= self.best_lex {
                    return;
                }
            }
            d
        };
        self.best_total = total;
        self.best_disp = disp;
        self.best_pickup_eta = pickup_eta;
        self.best_lex = self.lex_key(seq);
        self.best_seq = seq.to_vec();
    }

    /// Existing stops displaced from their previous relative order:
    /// count minus the longest increasing run of old indices.
    fn displacement(&self, seq: &[usize]) -> usize {
        let old: Vec<usize> = seq
            .iter()
            .filter_map(|&i| self.items[i].old_index)
            .collect();
        self.old_index_count - longest_increasing(&old)
    }

    fn lex_key(&self, seq: &[usize]) -> Vec<(u64, u8)> {
        seq.iter()
            .map(|&i| (self.items[i].order_id, self.items[i].kind as u8))
            .collect()
    }
}

fn longest_increasing(xs: &[usize]) -> usize {
    let mut best = vec![0usize; xs.len()];
    let mut max = 0;
    for i in 0..xs.len() {
        best[i] = 1;
        for j in 0..i {
            if xs[j] < xs[i] && best[j] + 1 > best[i] {
                best[i] = best[j] + 1;
            }
        }
        max = max.max(best[i]);
    }
    max
}

/// Insert `order_id` (pickup at `origin`, dropoff at `dest`) into `route`.
///
/// ρ, χ and the added km are measured against the pre-insertion stop ETAs
/// and deadlines. The new dropoff stop's deadline freezes to its ETA in the
/// chosen route.
pub fn best_insertion(
    route: &RoutePlan,
    pos: Point,
    now: f64,
    order_id: u64,
    origin: Point,
    dest: Point,
    speed_kmh: f64,
) -> InsertionResult {
    let mut items: Vec<Item> = Vec::with_capacity(route.stops.len() + 2);
    for (idx, stop) in route.stops.iter().enumerate() {
        items.push(Item {
            loc: stop.loc,
            kind: stop.kind,
            order_id: stop.order_id,
            old_index: Some(idx),
            deadline: stop.deadline,
            predecessor: None,
        });
    }
    // Wire precedence for existing pickup/dropoff pairs.
    for i in 0..items.len() {
        if items[i].kind == StopKind::Dropoff {
            items[i].predecessor = (0..i)
                .find(|&j| items[j].kind == StopKind::Pickup && items[j].order_id == items[i].order_id);
        }
    }
    let pickup_idx = items.len();
    items.push(Item {
        loc: origin,
        kind: StopKind::Pickup,
        order_id,
        old_index: None,
        deadline: None,
        predecessor: None,
    });
    items.push(Item {
        loc: dest,
        kind: StopKind::Dropoff,
        order_id,
        old_index: None,
        deadline: None,
        predecessor: Some(pickup_idx),
    });

    let seq = if items.len() <= MAX_EXACT_STOPS {
        let mut search = Search {
            items: &items,
            now,
            speed_kmh,
            old_index_count: route.stops.len(),
            best_seq: Vec::new(),
            best_total: f64::INFINITY,
            best_disp: usize::MAX,
            best_pickup_eta: f64::INFINITY,
            best_lex: Vec::new(),
        };
        search.run(pos);
        search.best_seq
    } else {
        cheapest_insertion_seq(&items, pickup_idx, pos, now, speed_kmh)
    };

    // Materialise the winning sequence.
    let mut stops = Vec::with_capacity(seq.len());
    let mut t = now;
    let mut p = pos;
    let mut new_order_eta = 0.0;
    for &i in &seq {
        t += travel_time_s(p, items[i].loc, speed_kmh);
        p = items[i].loc;
        let is_new_dropoff = items[i].old_index.is_none() && items[i].kind == StopKind::Dropoff;
        if is_new_dropoff {
            new_order_eta = t;
        }
        stops.push(Stop {
            kind: items[i].kind,
            order_id: items[i].order_id,
            loc: items[i].loc,
            eta: t,
            deadline: if is_new_dropoff { Some(t) } else { items[i].deadline },
        });
    }
    let new_route = RoutePlan { stops };

    let old_total = route.total_time(now).max(0.0);
    let new_total = new_route.total_time(now);
    let added_time = new_total - old_total;

    let mut rho = 0.0;
    let mut chi = 0u32;
    for old_stop in &route.stops {
        if old_stop.kind != StopKind::Dropoff {
            continue;
        }
        let new_eta = new_route
            .dropoff_eta(old_stop.order_id)
            .expect("existing dropoff preserved by insertion");
        rho += (new_eta - old_stop.eta).max(0.0);
        if let Some(deadline) = old_stop.deadline {
            if new_eta > deadline {
                chi += 1;
            }
        }
    }

    InsertionResult {
        new_route,
        added_vehicle_time_s: added_time,
        added_passenger_time_s: rho,
        late_count: chi,
        added_vehicle_km: added_time / 3600.0 * speed_kmh,
        new_order_eta,
    }
}

/// Fallback for oversized routes: keep the existing stop order, try every
/// (pickup, dropoff) position pair, take the cheapest.
fn cheapest_insertion_seq(
    items: &[Item],
    pickup_idx: usize,
    pos: Point,
    now: f64,
    speed_kmh: f64,
) -> Vec<usize> {
    let dropoff_idx = pickup_idx + 1;
    let k = pickup_idx; // number of existing stops
    let mut best: Option<(f64, Vec<usize>)> = None;
    for p in 0..=k {
        for d in p..=k {
            let mut seq: Vec<usize> = (0..k).collect();
            seq.insert(p, pickup_idx);
            seq.insert(d + 1, dropoff_idx);
            let mut t = now;
            let mut at = pos;
            for &i in &seq {
                t += travel_time_s(at, items[i].loc, speed_kmh);
                at = items[i].loc;
            }
            if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                best = Some((t, seq));
            }
        }
    }
    best.expect("at least one placement").1
}
