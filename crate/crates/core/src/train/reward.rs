use crate::routing::InsertionResult;
use crate::sim::SimConfig;

/// Per-assignment reward:
///
/// r = β1 + β2·p_in − β3·p_out − β4·χ − β5·ρ
///
/// where p_in is the passenger fare from the order's direct distance,
/// p_out the driver payout on the added route distance, χ the count of
/// en-route orders pushed past their scheduled dropoff and ρ the added
/// en-route delay in minutes. Unassigned agents receive exactly 0 (the
/// caller never calls this for them).
pub fn compute_reward(insertion: &InsertionResult, direct_km: f64, cfg: &SimConfig) -> f64 {
    let [b1, b2, b3, b4, b5] = cfg.beta;
    let p_in = cfg.fare_base + cfg.fare_per_km * direct_km;
    let p_out = cfg.payout_per_km * insertion.added_vehicle_km;
    let rho_minutes = insertion.added_passenger_time_s / 60.0;
    b1 + b2 * p_in - b3 * p_out - b4 * insertion.late_count as f64 - b5 * rho_minutes
}
