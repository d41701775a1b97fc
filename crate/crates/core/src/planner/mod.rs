//! Local planner: roll-out sampling, cost evaluation, action-to-parameter
//! mapping and the tracking controllers.

pub mod control;
pub mod cost;
pub mod params;
pub mod rollout;

pub use control::{find_leader, longitudinal_control, pure_pursuit, Leader};
pub use cost::{evaluate_rollouts, RolloutCost};
pub use params::{apply_action, ActionProfile, BehaviorParams, PlannerConfig};
pub use rollout::{generate_rollouts, rollout_targets, Rollout, Waypoint};
