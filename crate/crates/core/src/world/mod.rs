//! Road geometry, vehicle kinematics, traffic and world stepping.

pub mod collision;
pub mod road;
pub mod state;
pub mod vehicle;

pub use collision::{check_collision, separation, OrientedRect};
pub use road::{Lane, RoadModel};
pub use state::{step_world, EventKind, Npc, Outcome, WorldEvent, WorldParams, WorldState};
pub use vehicle::{step_ego, step_npc, KinematicLimits, VehicleState};
