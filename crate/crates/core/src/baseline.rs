//! Rule-based decision maker that commits to an overtake and never aborts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rl::Action;
use crate::scalar::Scalar;
use crate::world::{Lane, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Bumper gap to a slower same-lane vehicle that triggers an overtake.
    pub trigger_gap: f64,
    /// Distance the ego must lead the passed vehicle by before merging back.
    pub clear_margin: f64,
    /// Cruise speed the ego wants to hold; slower leaders get overtaken.
    pub target_speed: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            trigger_gap: 25.0,
            clear_margin: 8.0,
            target_speed: 3.6,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("baseline.trigger_gap", self.trigger_gap),
            ("baseline.clear_margin", self.clear_margin),
            ("baseline.target_speed", self.target_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselinePhase {
    LaneKeep,
    CommittedOvertake,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineState {
    pub phase: BaselinePhase,
    pub overtake_start_s: f64,
    /// Vehicle being overtaken while committed.
    pub passing: Option<u32>,
}

impl Default for BaselineState {
    fn default() -> Self {
        Self {
            phase: BaselinePhase::LaneKeep,
            overtake_start_s: 0.0,
            passing: None,
        }
    }
}

/// Lane keep until a slow vehicle ahead is within `trigger_gap`, then
/// overtake until it is `clear_margin` behind and the ego lane ahead is free.
pub fn rule_based_decide<T: Scalar>(
    world: &WorldState<T>,
    state: &BaselineState,
    cfg: &BaselineConfig,
) -> (Action, BaselineState) {
    let ego = &world.ego;
    let ego_s = ego.s.to_f64_lossy();
    match state.phase {
        BaselinePhase::LaneKeep => {
            let slow_leader = world
                .npcs
                .iter()
                .filter(|n| n.lane == Lane::Ego && n.state.s > ego.s)
                .map(|n| {
                    let gap = (n.state.s - ego.s - (n.state.length + ego.length) * T::lit(0.5)).to_f64_lossy();
                    (gap, n)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match slow_leader {
                Some((gap, n)) if gap < cfg.trigger_gap && n.target_speed.to_f64_lossy() < cfg.target_speed => (
                    Action::Overtaking,
                    BaselineState {
                        phase: BaselinePhase::CommittedOvertake,
                        overtake_start_s: ego_s,
                        passing: Some(n.id),
                    },
                ),
                _ => (Action::Following, *state),
            }
        }
        BaselinePhase::CommittedOvertake => {
            let passed = match state.passing.and_then(|id| world.npc(id)) {
                Some(n) => ego_s - n.state.s.to_f64_lossy() >= cfg.clear_margin,
                None => true,
            };
            let merge_free = !world.npcs.iter().any(|n| {
                let ds = (n.state.s - ego.s).to_f64_lossy();
                n.lane == Lane::Ego && ds > -cfg.clear_margin && ds < cfg.clear_margin
            });
            if passed && merge_free {
                (Action::Following, BaselineState::default())
            } else {
                (Action::Overtaking, *state)
            }
        }
    }
}
