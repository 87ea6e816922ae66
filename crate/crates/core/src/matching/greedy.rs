//! Nearest-driver dispatch baseline. No learning, no coordination.

use super::{Assignment, GreedyDriver};
use crate::routing::{travel_time_s, Point};

/// Match each order (in the given arrival order) to the closest available
/// driver by travel time, ties to the lower driver index. Drivers without
/// capacity are skipped; a matched driver takes no further order this step.
pub fn greedy_assignment(
    drivers: &[GreedyDriver],
    order_origins: &[Point],
    speed_kmh: f64,
) -> Assignment {
    let mut taken = vec![false; drivers.len()];
    let mut pairs = Vec::new();
    for (j, &origin) in order_origins.iter().enumerate() {
        let mut best: Option<(f64, usize)> = None;
        for (i, d) in drivers.iter().enumerate() {
            if !d.available || taken[i] {
                continue;
            }
            let t = travel_time_s(d.pos, origin, speed_kmh);
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
        if let Some((_, i)) = best {
            taken[i] = true;
            pairs.push((i, j));
        }
    }
    Assignment::from_pairs(pairs)
}
