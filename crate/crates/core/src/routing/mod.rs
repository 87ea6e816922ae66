//! Planar travel model and pickup-and-delivery route machinery.
//!
//! Travel runs on a Manhattan metric at constant speed; motion follows
//! axis-aligned paths, x before y on every leg. Routes are ordered stop
//! lists with absolute ETAs that are recomputed on every re-plan and
//! trusted between re-plans.

mod advance;
mod insertion;

pub use advance::{advance_route, RouteEvent};
pub use insertion::{best_insertion, InsertionResult, MAX_EXACT_STOPS};

use serde::{Deserialize, Serialize};

/// Position in km within the city rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Manhattan distance in km.
pub fn manhattan_km(a: Point, b: Point) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

/// Travel time in seconds at `speed_kmh`.
pub fn travel_time_s(a: Point, b: Point, speed_kmh: f64) -> f64 {
    manhattan_km(a, b) / speed_kmh * 3600.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopKind {
    Pickup,
    Dropoff,
}

/// One scheduled stop. Dropoff stops carry the order's frozen scheduled
/// dropoff time once it is known; χ accounting compares new ETAs against it.
#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub kind: StopKind,
    pub order_id: u64,
    pub loc: Point,
    /// Absolute arrival time in seconds.
    pub eta: f64,
    /// Frozen scheduled dropoff (dropoff stops only).
    pub deadline: Option<f64>,
}

/// Ordered stop sequence for one vehicle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoutePlan {
    pub stops: Vec<Stop>,
}

impl RoutePlan {
    pub fn empty() -> Self {
        Self { stops: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    /// Seconds from `now` through the last stop; 0 for an empty route.
    pub fn total_time(&self, now: f64) -> f64 {
        self.stops.last().map_or(0.0, |s| s.eta - now)
    }

    /// Recompute all ETAs from `pos` at `now`, walking the stops in order.
    pub fn recompute_etas(&mut self, pos: Point, now: f64, speed_kmh: f64) {
        let mut t = now;
        let mut p = pos;
        for stop in &mut self.stops {
            t += travel_time_s(p, stop.loc, speed_kmh);
            stop.eta = t;
            p = stop.loc;
        }
    }

    /// Pickup precedes dropoff per order and ETAs never decrease.
    pub fn is_valid(&self) -> bool {
        let mut last_eta = f64::NEG_INFINITY;
        for (i, stop) in self.stops.iter().enumerate() {
            if stop.eta < last_eta {
                return false;
            }
            last_eta = stop.eta;
            if stop.kind == StopKind::Dropoff {
                let pickup_later = self.stops[i + 1..]
                    .iter()
                    .any(|s| s.kind == StopKind::Pickup && s.order_id == stop.order_id);
                if pickup_later {
                    return false;
                }
            }
        }
        true
    }

    /// ETA of the dropoff stop for `order_id`, if present.
    pub fn dropoff_eta(&self, order_id: u64) -> Option<f64> {
        self.stops
            .iter()
            .find(|s| s.kind == StopKind::Dropoff && s.order_id == order_id)
            .map(|s| s.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn travel_time_identity() {
        let a = Point::new(3.0, 4.0);
        assert_eq!(travel_time_s(a, a, 60.0), 0.0);
    }

    #[test]
    fn travel_time_one_km_per_minute() {
        // 1 km + 2 km at 60 km/h = 3 minutes.
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 2.0);
        assert!((travel_time_s(a, b, 60.0) - 180.0).abs() < 1e-9);
    }

    #[test]
    fn travel_time_symmetric_and_triangle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut p = || Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let (a, b, c) = (p(), p(), p());
            let ab = travel_time_s(a, b, 60.0);
            let ba = travel_time_s(b, a, 60.0);
            assert_eq!(ab, ba);
            let ac = travel_time_s(a, c, 60.0);
            let cb = travel_time_s(c, b, 60.0);
            assert!(ab <= ac + cb + 1e-9);
        }
    }

    #[test]
    fn route_validity_checks_precedence() {
        let mk = |kind, id, eta| Stop {
            kind,
            order_id: id,
            loc: Point::new(0.0, 0.0),
            eta,
            deadline: None,
        };
        let good = RoutePlan {
            stops: vec![mk(StopKind::Pickup, 1, 10.0), mk(StopKind::Dropoff, 1, 20.0)],
        };
        assert!(good.is_valid());
        let bad = RoutePlan {
            stops: vec![mk(StopKind::Dropoff, 1, 10.0), mk(StopKind::Pickup, 1, 20.0)],
        };
        assert!(!bad.is_valid());
    }
}
