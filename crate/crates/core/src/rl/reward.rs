use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::world::{EventKind, RoadModel, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub progress_weight: f64,
    pub goal_bonus: f64,
    pub crash_penalty: f64,
    pub lane_switch_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            progress_weight: 0.1,
            goal_bonus: 50.0,
            crash_penalty: 100.0,
            lane_switch_penalty: 0.05,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("reward.progress_weight", self.progress_weight),
            ("reward.goal_bonus", self.goal_bonus),
            ("reward.crash_penalty", self.crash_penalty),
            ("reward.lane_switch_penalty", self.lane_switch_penalty),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("{v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Largest reward magnitude any single transition can produce.
    pub fn bound(&self) -> f64 {
        self.progress_weight + self.goal_bonus + self.crash_penalty + self.lane_switch_penalty
    }
}

/// Reward for one decision interval from `prev` to `next`.
///
/// A progress term inversely proportional to the remaining distance, a bonus
/// for reaching the goal in the ego lane, a penalty for collisions or leaving
/// the road, and a small penalty when the planner's target lane changed.
pub fn reward<T: Scalar>(prev: &WorldState<T>, next: &WorldState<T>, road: &RoadModel<T>, config: &RewardConfig) -> T {
    let dist = road.distance_to_goal(next.ego.s);
    let mut r = T::lit(config.progress_weight) / (T::one() + dist);
    match next.terminal_event().map(|e| e.kind) {
        Some(EventKind::GoalReached) => r += T::lit(config.goal_bonus),
        Some(EventKind::Collision { .. }) | Some(EventKind::OffRoad) => r -= T::lit(config.crash_penalty),
        _ => {}
    }
    if prev.target_lane != next.target_lane {
        r -= T::lit(config.lane_switch_penalty);
    }
    r
}
