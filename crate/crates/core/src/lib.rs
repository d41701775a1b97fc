//! Abortable overtaking: a straight two-lane road world, a sampling local
//! planner, a DQN high-level decision maker, a rule-based baseline and the
//! scenario bench used to compare them.

pub mod baseline;
pub mod bench;
pub mod config;
pub mod error;
pub mod planner;
pub mod rl;
pub mod scalar;
pub mod world;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use config::RunConfig;

pub type VehicleState64 = world::VehicleState<f64>;
pub type VehicleState32 = world::VehicleState<f32>;
pub type WorldState64 = world::WorldState<f64>;
pub type WorldState32 = world::WorldState<f32>;
pub type QNet64 = rl::QNetwork<f64>;
pub type QNet32 = rl::QNetwork<f32>;
