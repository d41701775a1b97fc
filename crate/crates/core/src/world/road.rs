use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lane a vehicle is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lane {
    /// The ego vehicle's own lane, centerline at `d = 0`.
    Ego,
    /// The oncoming lane, centerline at `d = +lane_width`.
    Opposite,
}

/// Straight two-lane road in `(s, d)` coordinates.
///
/// `s` runs along the ego lane in the direction of travel and `d` is the
/// signed lateral offset, positive toward the oncoming lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadModel<T> {
    length: T,
    lane_width: T,
    goal_s: T,
}

impl<T: Scalar> RoadModel<T> {
    pub fn new(length: T, lane_width: T, goal_s: T) -> Result<Self> {
        if !(length.is_finite() && lane_width.is_finite() && goal_s.is_finite()) {
            return Err(Error::Validation("road dimensions must be finite".into()));
        }
        if lane_width <= T::zero() {
            return Err(Error::Validation(format!("lane_width {lane_width} must be > 0")));
        }
        if goal_s <= T::zero() || goal_s > length {
            return Err(Error::Validation(format!(
                "goal_s {goal_s} must lie in (0, length = {length}]"
            )));
        }
        Ok(Self {
            length,
            lane_width,
            goal_s,
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn lane_width(&self) -> T {
        self.lane_width
    }

    pub fn goal_s(&self) -> T {
        self.goal_s
    }

    pub fn ego_lane_center_d(&self) -> T {
        T::zero()
    }

    pub fn opposite_lane_center_d(&self) -> T {
        self.lane_width
    }

    pub fn lane_center(&self, lane: Lane) -> T {
        match lane {
            Lane::Ego => self.ego_lane_center_d(),
            Lane::Opposite => self.opposite_lane_center_d(),
        }
    }

    /// Lane containing lateral offset `d`; the boundary belongs to the ego lane.
    pub fn lane_of(&self, d: T) -> Lane {
        if d > self.lane_width / T::lit(2.0) {
            Lane::Opposite
        } else {
            Lane::Ego
        }
    }

    /// Lateral band outside of which a vehicle counts as off the road.
    pub fn drivable_band(&self) -> (T, T) {
        (-self.lane_width, T::lit(2.0) * self.lane_width)
    }

    pub fn distance_to_goal(&self, s: T) -> T {
        (self.goal_s - s).max(T::zero())
    }
}
