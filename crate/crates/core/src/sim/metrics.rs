use super::{OrderStatus, World};
use serde::Serialize;

/// Episode-level service quality summary. Time means cover completed
/// orders only and are absent when nothing completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub served: u32,
    pub cancelled: u32,
    pub total_reward: f64,
    pub mean_delivery_s: Option<f64>,
    pub mean_detour_s: Option<f64>,
    pub mean_pickup_s: Option<f64>,
    pub mean_confirmation_s: Option<f64>,
}

pub fn collect_metrics(world: &World) -> EpisodeMetrics {
    let mut n = 0u32;
    let (mut delivery, mut detour, mut pickup, mut confirmation) = (0.0, 0.0, 0.0, 0.0);
    for order in world.orders() {
        if order.status != OrderStatus::Completed {
            continue;
        }
        let (assigned, picked, dropped) = (
            order.assigned_t.expect("completed order has assigned_t"),
            order.pickup_t.expect("completed order has pickup_t"),
            order.dropoff_t.expect("completed order has dropoff_t"),
        );
        n += 1;
        let d = dropped - picked;
        delivery += d;
        detour += (d - order.direct_time_s).max(0.0);
        pickup += picked - order.arrival_t;
        confirmation += assigned - order.arrival_t;
    }
    let mean = |sum: f64| (n > 0).then(|| sum / n as f64);
    EpisodeMetrics {
        served: n,
        cancelled: world.cancelled_count(),
        total_reward: world.total_reward(),
        mean_delivery_s: mean(delivery),
        mean_detour_s: mean(detour),
        mean_pickup_s: mean(pickup),
        mean_confirmation_s: mean(confirmation),
    }
}
