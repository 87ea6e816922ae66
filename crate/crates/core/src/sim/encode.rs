//! Fixed-layout feature vector for one driver-order pair.
//!
//! Dimension `10 + 5c`:
//!
//! ```text
//! [0..5)   order block   o_x o_y d_x d_y age
//! [5..10)  driver block  v_x v_y cap/c cum_norm group_avg_norm
//! [10..)   c onboard slots, each dest_x dest_y est_total rem_time occupied,
//!          zero-padded for empty seats (slots sorted by order id)
//! ```
//!
//! Coordinates are divided by the city extent, times by the episode length
//! and cumulative rewards by the episode's running absolute maximum
//! (floored at 1).

use super::{Order, OrderStatus, SimConfig, VehicleState};
use crate::{Error, Result};

pub fn feature_dim(capacity: u32) -> usize {
    10 + 5 * capacity as usize
}

/// Encode one (driver, order) pair at decision time `t_now`.
///
/// `orders` resolves onboard order ids; `group_avg_cum_reward` and
/// `reward_norm` come from the world's step-level bookkeeping. Rejects
/// non-pending orders and drivers without a free seat — those pairs must
/// have been filtered out upstream.
#[allow(clippy::too_many_arguments)]
pub fn encode_pair(
    cfg: &SimConfig,
    driver: &VehicleState,
    order: &Order,
    orders: &[Order],
    group_avg_cum_reward: f64,
    reward_norm: f64,
    t_now: f64,
    out: &mut [f64],
) -> Result<()> {
    if order.status != OrderStatus::Pending {
        return Err(Error::Encode(format!(
            "order {} is not pending ({:?})",
            order.id, order.status
        )));
    }
    if driver.remaining_capacity(cfg.capacity) == 0 {
        return Err(Error::Encode(format!("driver {} has no free seat", driver.id)));
    }
    let dim = feature_dim(cfg.capacity);
    if out.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: out.len(),
        });
    }

    let (ex, ey) = (cfg.extent_x_km, cfg.extent_y_km);
    let horizon = cfg.episode_len_s();
    let norm = reward_norm.max(1.0);

    out[0] = order.origin.x / ex;
    out[1] = order.origin.y / ey;
    out[2] = order.dest.x / ex;
    out[3] = order.dest.y / ey;
    out[4] = (t_now - order.arrival_t).max(0.0) / horizon;

    out[5] = driver.pos.x / ex;
    out[6] = driver.pos.y / ey;
    out[7] = driver.remaining_capacity(cfg.capacity) as f64 / cfg.capacity as f64;
    out[8] = driver.cum_reward / norm;
    out[9] = group_avg_cum_reward / norm;

    out[10..].fill(0.0);
    let mut onboard: Vec<u64> = driver.onboard.clone();
    onboard.sort_unstable();
    for (slot, &oid) in onboard.iter().enumerate().take(cfg.capacity as usize) {
        let o = &orders[oid as usize];
        let base = 10 + 5 * slot;
        let eta = driver
            .route
            .dropoff_eta(oid)
            .ok_or_else(|| Error::Encode(format!("onboard order {oid} missing from route")))?;
        out[base] = o.dest.x / ex;
        out[base + 1] = o.dest.y / ey;
        out[base + 2] = (eta - o.pickup_t.unwrap_or(t_now)) / horizon;
        out[base + 3] = (eta - t_now) / horizon;
        out[base + 4] = 1.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::Point;

    fn cfg() -> SimConfig {
        SimConfig {
            n_drivers: 2,
            extent_x_km: 10.0,
            extent_y_km: 10.0,
            ..Default::default()
        }
    }

    #[test]
    fn dimension_is_ten_plus_five_c() {
        assert_eq!(feature_dim(3), 25);
        assert_eq!(feature_dim(4), 30);
    }

    #[test]
    fn empty_vehicle_pads_all_slots() {
        let cfg = cfg();
        let driver = VehicleState::new(0, Point::new(5.0, 5.0));
        let order = Order::new(0, Point::new(1.0, 2.0), Point::new(3.0, 4.0), 0.0, 60.0);
        let mut out = vec![f64::NAN; 25];
        encode_pair(&cfg, &driver, &order, &[order.clone()], 0.0, 1.0, 0.0, &mut out).unwrap();
        assert_eq!(&out[10..], &[0.0; 15]);
        // Driver at the centre of a 10 km extent.
        assert_eq!(out[5], 0.5);
        assert_eq!(out[6], 0.5);
        assert_eq!(out[7], 1.0);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn non_pending_order_rejected() {
        let cfg = cfg();
        let driver = VehicleState::new(0, Point::new(0.0, 0.0));
        let mut order = Order::new(0, Point::new(1.0, 2.0), Point::new(3.0, 4.0), 0.0, 60.0);
        order.status = OrderStatus::Assigned;
        let mut out = vec![0.0; 25];
        assert!(
            encode_pair(&cfg, &driver, &order, &[order.clone()], 0.0, 1.0, 0.0, &mut out).is_err()
        );
    }

    #[test]
    fn full_driver_rejected() {
        let cfg = cfg();
        let mut driver = VehicleState::new(0, Point::new(0.0, 0.0));
        driver.assigned = vec![1, 2, 3];
        let order = Order::new(0, Point::new(1.0, 2.0), Point::new(3.0, 4.0), 0.0, 60.0);
        let mut out = vec![0.0; 25];
        assert!(
            encode_pair(&cfg, &driver, &order, &[order.clone()], 0.0, 1.0, 0.0, &mut out).is_err()
        );
    }
}
