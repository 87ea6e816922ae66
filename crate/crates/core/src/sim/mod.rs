//! World state and the discrete-time episode loop: order arrival and
//! expiry, feature encoding, assignment execution, reward bookkeeping and
//! metric collection.

mod config;
mod encode;
mod metrics;
mod order;
mod source;
mod vehicle;
mod world;

pub use config::SimConfig;
pub use encode::{encode_pair, feature_dim};
pub use metrics::{collect_metrics, EpisodeMetrics};
pub use order::{Order, OrderStatus};
pub use source::{OrderSource, OrderSpec, SyntheticConfig};
pub use vehicle::VehicleState;
pub use world::{StepOutcome, World};
