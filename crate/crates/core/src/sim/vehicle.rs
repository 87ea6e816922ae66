use crate::routing::{Point, RoutePlan};

/// One homogeneous agent: position, planned route and reward tally.
#[derive(Debug, Clone)]
pub struct VehicleState {
    pub id: usize,
    pub pos: Point,
    /// Orders physically in the vehicle.
    pub onboard: Vec<u64>,
    /// Orders assigned but not yet picked up; they reserve seats.
    pub assigned: Vec<u64>,
    pub route: RoutePlan,
    /// Reward accumulated since episode start.
    pub cum_reward: f64,
}

impl VehicleState {
    pub fn new(id: usize, pos: Point) -> Self {
        Self {
            id,
            pos,
            onboard: Vec::new(),
            assigned: Vec::new(),
            route: RoutePlan::empty(),
            cum_reward: 0.0,
        }
    }

    /// Seats not yet claimed by onboard or assigned orders.
    pub fn remaining_capacity(&self, capacity: u32) -> u32 {
        capacity.saturating_sub((self.onboard.len() + self.assigned.len()) as u32)
    }
}
