use crate::routing::{manhattan_km, Point};

/// Lifecycle of a passenger request. Transitions are monotone:
/// Pending → Assigned → Onboard → Completed, or Pending → Cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderStatus {
    Pending,
    Assigned,
    Onboard,
    Completed,
    Cancelled,
}

/// A passenger request with its lifecycle timestamps (absolute seconds).
#[derive(Debug, Clone)]
pub struct Order {
    pub id: u64,
    pub origin: Point,
    pub dest: Point,
    pub arrival_t: f64,
    pub assigned_t: Option<f64>,
    pub pickup_t: Option<f64>,
    pub dropoff_t: Option<f64>,
    /// Dropoff ETA frozen at first assignment.
    pub scheduled_dropoff: Option<f64>,
    pub direct_km: f64,
    pub direct_time_s: f64,
    pub status: OrderStatus,
}

impl Order {
    pub fn new(id: u64, origin: Point, dest: Point, arrival_t: f64, speed_kmh: f64) -> Self {
        let direct_km = manhattan_km(origin, dest);
        Self {
            id,
            origin,
            dest,
            arrival_t,
            assigned_t: None,
            pickup_t: None,
            dropoff_t: None,
            scheduled_dropoff: None,
            direct_km,
            direct_time_s: direct_km / speed_kmh * 3600.0,
            status: OrderStatus::Pending,
        }
    }

    /// Timestamps set so far, in lifecycle order.
    pub fn timeline(&self) -> impl Iterator<Item = f64> + '_ {
        [
            Some(self.arrival_t),
            self.assigned_t,
            self.pickup_t,
            self.dropoff_t,
        ]
        .into_iter()
        .flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_time_cached_from_travel_model() {
        let o = Order::new(0, Point::new(0.0, 0.0), Point::new(1.0, 2.0), 5.0, 60.0);
        assert!((o.direct_time_s - 180.0).abs() < 1e-9);
        assert!((o.direct_km - 3.0).abs() < 1e-12);
        assert_eq!(o.status, OrderStatus::Pending);
    }
}
