use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// World and reward parameters for one fleet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_drivers: usize,
    /// Seats per vehicle.
    pub capacity: u32,
    pub speed_kmh: f64,
    /// Seconds per decision step.
    pub step_len_s: f64,
    /// Steps per episode.
    pub horizon_steps: u32,
    /// City rectangle in km.
    pub extent_x_km: f64,
    pub extent_y_km: f64,
    /// Pending orders cancel after waiting this long.
    pub max_wait_s: f64,
    /// Passenger fare: base plus per-km on the order's direct distance.
    pub fare_base: f64,
    pub fare_per_km: f64,
    /// Driver payout per km of added route distance.
    pub payout_per_km: f64,
    /// Reward weights β1..β5: assignment bonus, fare, payout, lateness
    /// count, en-route delay (minutes).
    pub beta: [f64; 5],
    /// Base seed; episode and stream seeds derive from it.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_drivers: 1000,
            capacity: 3,
            speed_kmh: 60.0,
            step_len_s: 60.0,
            horizon_steps: 30,
            extent_x_km: 10.0,
            extent_y_km: 10.0,
            max_wait_s: 300.0,
            fare_base: 2.0,
            fare_per_km: 1.0,
            payout_per_km: 0.6,
            beta: [1.0, 1.0, 1.0, 0.5, 0.1],
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Error {
            Error::Config {
                field,
                reason: reason.into(),
            }
        }
        if self.n_drivers == 0 {
            return Err(bad("n_drivers", "must be >= 1"));
        }
        if self.capacity == 0 {
            return Err(bad("capacity", "must be >= 1"));
        }
        if !(self.speed_kmh > 0.0) {
            return Err(bad("speed_kmh", "must be positive"));
        }
        if !(self.step_len_s > 0.0) {
            return Err(bad("step_len_s", "must be positive"));
        }
        if self.horizon_steps == 0 {
            return Err(bad("horizon_steps", "must be >= 1"));
        }
        if !(self.extent_x_km > 0.0) || !(self.extent_y_km > 0.0) {
            return Err(bad("extent_x_km", "city extent must be positive"));
        }
        if self.max_wait_s < 0.0 {
            return Err(bad("max_wait_s", "must be >= 0"));
        }
        for (i, b) in self.beta.iter().enumerate() {
            if !(*b >= 0.0) {
                return Err(bad("beta", format!("beta{} must be >= 0", i + 1)));
            }
        }
        if self.fare_base < 0.0 || self.fare_per_km < 0.0 || self.payout_per_km < 0.0 {
            return Err(bad("fare_base", "economic parameters must be >= 0"));
        }
        Ok(())
    }

    /// Episode length in seconds.
    pub fn episode_len_s(&self) -> f64 {
        self.horizon_steps as f64 * self.step_len_s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn zero_drivers_rejected_with_field_name() {
        let cfg = SimConfig {
            n_drivers: 0,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("n_drivers"));
    }

    #[test]
    fn negative_beta_rejected() {
        let cfg = SimConfig {
            beta: [1.0, 1.0, -0.1, 0.5, 0.1],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
