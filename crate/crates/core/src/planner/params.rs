use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::rl::Action;
use crate::scalar::Scalar;
use crate::world::RoadModel;

/// Planner parameters one high-level action switches to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionProfile {
    pub velocity: f64,
    pub acceleration: f64,
    pub following_distance: f64,
    pub avoiding_distance: f64,
    pub rollout_number: usize,
}

impl ActionProfile {
    fn validate(&self, name: &str) -> Result<()> {
        let field = |f: &str| format!("planner.{name}.{f}");
        if !(self.velocity.is_finite() && self.velocity >= 0.0) {
            return Err(Error::config(field("velocity"), "must be finite and >= 0"));
        }
        if !(self.acceleration.is_finite() && self.acceleration > 0.0) {
            return Err(Error::config(field("acceleration"), "must be finite and > 0"));
        }
        if !(self.following_distance.is_finite() && self.following_distance > 0.0) {
            return Err(Error::config(field("following_distance"), "must be finite and > 0"));
        }
        if !(self.avoiding_distance.is_finite() && self.avoiding_distance > 0.0) {
            return Err(Error::config(field("avoiding_distance"), "must be finite and > 0"));
        }
        if self.rollout_number == 0 || self.rollout_number % 2 == 0 {
            return Err(Error::config(field("rollout_number"), "must be odd and >= 1"));
        }
        Ok(())
    }
}

/// Local planner and tracking-controller configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    /// Roll-out length along `s` (m).
    pub horizon: f64,
    /// Distance over which a roll-out blends to its lateral target (m).
    pub transition_length: f64,
    pub waypoint_spacing: f64,
    pub weight_collision: f64,
    pub weight_transition: f64,
    pub weight_center: f64,
    /// Length scale of the clearance penalty `exp(-clearance / scale)`.
    pub clearance_scale: f64,
    /// Cost added once per NPC whose predicted footprint overlaps a roll-out,
    /// scaled by `1 + 1 / (1 + t)` for first overlap time `t`.
    pub overlap_penalty: f64,
    pub lookahead: f64,
    pub gain_speed: f64,
    pub gain_gap: f64,
    /// Extra lateral slack when deciding whether a vehicle shares the ego's corridor.
    pub corridor_margin: f64,
    /// Vehicles closer than this in the ego's current corridor are followed
    /// even when the tracked path swerves around them (m).
    pub emergency_gap: f64,
    #[serde(deserialize_with = "following_patch")]
    pub following: ActionProfile,
    #[serde(deserialize_with = "overtaking_patch")]
    pub overtaking: ActionProfile,
    #[serde(deserialize_with = "aborting_patch")]
    pub aborting: ActionProfile,
}

/// Partial profile from a config file; missing keys keep the action's default.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfilePatch {
    velocity: Option<f64>,
    acceleration: Option<f64>,
    following_distance: Option<f64>,
    avoiding_distance: Option<f64>,
    rollout_number: Option<usize>,
}

impl ProfilePatch {
    fn apply(self, base: ActionProfile) -> ActionProfile {
        ActionProfile {
            velocity: self.velocity.unwrap_or(base.velocity),
            acceleration: self.acceleration.unwrap_or(base.acceleration),
            following_distance: self.following_distance.unwrap_or(base.following_distance),
            avoiding_distance: self.avoiding_distance.unwrap_or(base.avoiding_distance),
            rollout_number: self.rollout_number.unwrap_or(base.rollout_number),
        }
    }
}

fn following_patch<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ActionProfile, D::Error> {
    Ok(ProfilePatch::deserialize(d)?.apply(PlannerConfig::default().following))
}

fn overtaking_patch<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ActionProfile, D::Error> {
    Ok(ProfilePatch::deserialize(d)?.apply(PlannerConfig::default().overtaking))
}

fn aborting_patch<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ActionProfile, D::Error> {
    Ok(ProfilePatch::deserialize(d)?.apply(PlannerConfig::default().aborting))
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            horizon: 50.0,
            transition_length: 15.0,
            waypoint_spacing: 0.5,
            weight_collision: 10.0,
            weight_transition: 1.0,
            weight_center: 1.5,
            clearance_scale: 1.0,
            overlap_penalty: 1.0e6,
            lookahead: 4.0,
            gain_speed: 0.8,
            gain_gap: 0.3,
            corridor_margin: 0.3,
            emergency_gap: 2.0,
            following: ActionProfile {
                velocity: 3.6,
                acceleration: 1.0,
                following_distance: 8.0,
                avoiding_distance: 1.0,
                rollout_number: 7,
            },
            overtaking: ActionProfile {
                velocity: 4.2,
                acceleration: 1.5,
                following_distance: 6.0,
                avoiding_distance: 1.0,
                rollout_number: 13,
            },
            aborting: ActionProfile {
                velocity: 2.0,
                acceleration: 2.0,
                following_distance: 8.0,
                avoiding_distance: 1.0,
                rollout_number: 7,
            },
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("planner.horizon", self.horizon),
            ("planner.transition_length", self.transition_length),
            ("planner.waypoint_spacing", self.waypoint_spacing),
            ("planner.weight_collision", self.weight_collision),
            ("planner.weight_transition", self.weight_transition),
            ("planner.weight_center", self.weight_center),
            ("planner.clearance_scale", self.clearance_scale),
            ("planner.overlap_penalty", self.overlap_penalty),
            ("planner.lookahead", self.lookahead),
            ("planner.gain_speed", self.gain_speed),
            ("planner.gain_gap", self.gain_gap),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, format!("{value} must be finite and > 0")));
            }
        }
        if !(self.emergency_gap.is_finite() && self.emergency_gap >= 0.0) {
            return Err(Error::config("planner.emergency_gap", "must be finite and >= 0"));
        }
        if !(self.corridor_margin.is_finite() && self.corridor_margin >= 0.0) {
            return Err(Error::config("planner.corridor_margin", "must be finite and >= 0"));
        }
        if self.waypoint_spacing > self.horizon {
            return Err(Error::config("planner.waypoint_spacing", "must not exceed the horizon"));
        }
        self.following.validate("following")?;
        self.overtaking.validate("overtaking")?;
        self.aborting.validate("aborting")?;
        if self.overtaking.velocity < self.following.velocity {
            return Err(Error::config("planner.overtaking.velocity", "must be >= following velocity"));
        }
        if self.aborting.velocity > self.following.velocity {
            return Err(Error::config("planner.aborting.velocity", "must be <= following velocity"));
        }
        Ok(())
    }

    pub fn profile(&self, action: Action) -> &ActionProfile {
        match action {
            Action::Following => &self.following,
            Action::Overtaking => &self.overtaking,
            Action::Aborting => &self.aborting,
        }
    }
}

/// The planner settings in force for one decision interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviorParams<T> {
    pub velocity: T,
    pub acceleration: T,
    pub following_distance: T,
    pub avoiding_distance: T,
    pub rollout_number: usize,
    /// Index of the roll-out currently being tracked.
    pub rollout_id: usize,
    pub lateral_range: (T, T),
    /// Multiplier on the transition weight; below 1 speeds up lateral returns.
    pub transition_scale: T,
}

impl<T: Scalar> BehaviorParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.rollout_number == 0 || self.rollout_number % 2 == 0 {
            return Err(Error::Validation(format!(
                "rollout_number {} must be odd and >= 1",
                self.rollout_number
            )));
        }
        if self.rollout_id >= self.rollout_number {
            return Err(Error::Validation(format!(
                "rollout_id {} out of range for {} roll-outs",
                self.rollout_id, self.rollout_number
            )));
        }
        let (lo, hi) = self.lateral_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Validation(format!("bad lateral range ({lo}, {hi})")));
        }
        if !(self.following_distance > T::zero() && self.avoiding_distance > T::zero()) {
            return Err(Error::Validation("distances must be > 0".into()));
        }
        Ok(())
    }

    /// Index of the roll-out at the center of the lateral range.
    pub fn middle_rollout(&self) -> usize {
        (self.rollout_number - 1) / 2
    }
}

/// Maps a high-level action to the local planner's parameter set.
///
/// Following and Aborting confine roll-outs to the ego lane; Overtaking opens
/// the oncoming lane. Aborting also halves the transition weight.
pub fn apply_action<T: Scalar>(action: Action, config: &PlannerConfig, road: &RoadModel<T>) -> BehaviorParams<T> {
    let profile = config.profile(action);
    let half_lane = road.lane_width() / T::lit(2.0);
    let lateral_range = match action {
        Action::Following | Action::Aborting => (-half_lane, half_lane),
        Action::Overtaking => (-half_lane, road.opposite_lane_center_d() + half_lane),
    };
    let transition_scale = match action {
        Action::Aborting => T::lit(0.5),
        _ => T::one(),
    };
    BehaviorParams {
        velocity: T::lit(profile.velocity),
        acceleration: T::lit(profile.acceleration),
        following_distance: T::lit(profile.following_distance),
        avoiding_distance: T::lit(profile.avoiding_distance),
        rollout_number: profile.rollout_number,
        rollout_id: (profile.rollout_number - 1) / 2,
        lateral_range,
        transition_scale,
    }
}
