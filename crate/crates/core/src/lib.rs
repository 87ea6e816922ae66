//! Deterministic ride-pooling dispatch laboratory.
//!
//! The crate is organised around one decision cycle: every step the world
//! offers a pool of pending orders, a shared policy network scores each
//! feasible driver-order pair, a maximum-weight matching turns the scores
//! into an assignment, and exact route insertion executes it. On top of the
//! simulator sit four critic-free policy-gradient trainers (GRPO, OSPO and
//! the IPPO/IPG ablations) plus a greedy dispatch baseline.
//!
//! Everything is seeded and single-stream deterministic: two runs with the
//! same configuration and seed produce bit-identical rewards, metrics and
//! checkpoints. The `parallel` feature (on by default) runs the per-step
//! candidate scoring and batch backprop on rayon; the sequential fallback
//! performs the identical arithmetic in the identical reduction order, so
//! results do not depend on the feature or the thread count.

pub mod error;
pub mod matching;
pub mod nn;
pub mod routing;
pub mod rng;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
