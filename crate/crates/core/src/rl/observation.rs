use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::world::{Lane, Npc, RoadModel, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservationConfig {
    /// Number of NPC slots `K`; slot 1 is the leader, slot 2 oncoming traffic.
    pub slots: usize,
    /// `rel_s` written into empty slots (m).
    pub far_distance: f64,
    pub speed_scale: f64,
    pub distance_scale: f64,
    pub lateral_scale: f64,
    pub yaw_rate_scale: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            slots: 3,
            far_distance: 200.0,
            speed_scale: 5.0,
            distance_scale: 100.0,
            lateral_scale: 5.0,
            yaw_rate_scale: 1.0,
        }
    }
}

impl ObservationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slots < 2 {
            return Err(Error::config("observation.slots", "needs at least 2 slots"));
        }
        for (field, v) in [
            ("observation.far_distance", self.far_distance),
            ("observation.speed_scale", self.speed_scale),
            ("observation.distance_scale", self.distance_scale),
            ("observation.lateral_scale", self.lateral_scale),
            ("observation.yaw_rate_scale", self.yaw_rate_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("{v} must be finite and > 0")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        3 + 5 * self.slots
    }
}

/// One NPC expressed in the ego frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpcSlot<T> {
    pub npc_id: Option<u32>,
    pub rel_s: T,
    pub rel_d: T,
    pub rel_v_long: T,
    pub rel_v_lat: T,
}

impl<T: Scalar> NpcSlot<T> {
    fn empty(far: T) -> Self {
        Self {
            npc_id: None,
            rel_s: far,
            rel_d: T::zero(),
            rel_v_long: T::zero(),
            rel_v_lat: T::zero(),
        }
    }

    pub fn is_present(&self) -> bool {
        self.npc_id.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub ego_speed: T,
    pub ego_yaw_rate: T,
    pub ego_lateral: T,
    pub slots: Vec<NpcSlot<T>>,
}

impl<T: Scalar> Observation<T> {
    /// Normalized network input of length `3 + 5K`.
    pub fn features(&self, config: &ObservationConfig) -> Vec<T> {
        let speed = T::lit(config.speed_scale);
        let dist = T::lit(config.distance_scale);
        let lat = T::lit(config.lateral_scale);
        let mut out = Vec::with_capacity(3 + 5 * self.slots.len());
        out.push(self.ego_speed / speed);
        out.push(self.ego_yaw_rate / T::lit(config.yaw_rate_scale));
        out.push(self.ego_lateral / lat);
        for slot in &self.slots {
            out.push(slot.rel_s / dist);
            out.push(slot.rel_d / lat);
            out.push(slot.rel_v_long / speed);
            out.push(slot.rel_v_lat / speed);
            out.push(if slot.is_present() { T::one() } else { T::zero() });
        }
        out
    }
}

/// An NPC counts as ahead until its rear has cleared the ego's rear.
fn not_passed<T: Scalar>(world: &WorldState<T>, npc: &Npc<T>) -> bool {
    npc.state.s - world.ego.s > -(world.ego.length + npc.state.length) * T::lit(0.5)
}

fn by_gap<T: Scalar>(world: &WorldState<T>) -> impl Fn(&&Npc<T>, &&Npc<T>) -> Ordering + '_ {
    move |a, b| {
        let ga = (a.state.s - world.ego.s).abs();
        let gb = (b.state.s - world.ego.s).abs();
        ga.partial_cmp(&gb).unwrap_or(Ordering::Equal).then(a.id.cmp(&b.id))
    }
}

fn nearest_ahead<T: Scalar>(world: &WorldState<T>, lane: Lane) -> Option<&Npc<T>> {
    world
        .npcs
        .iter()
        .filter(|n| n.lane == lane && not_passed(world, n))
        .min_by(by_gap(world))
}

/// Encodes the world in the ego frame.
///
/// Slot 1 holds the nearest ego-lane vehicle ahead, slot 2 the nearest
/// oncoming vehicle ahead, and the remaining slots the other NPCs by
/// longitudinal distance. Relative quantities are NPC minus ego, rotated
/// into the ego heading.
pub fn encode_observation<T: Scalar>(
    world: &WorldState<T>,
    road: &RoadModel<T>,
    config: &ObservationConfig,
) -> Observation<T> {
    let ego = &world.ego;
    let (sin, cos) = ego.heading.sin_cos();
    let (ego_vs, ego_vd) = ego.velocity();
    let rotate = |x: T, y: T| (x * cos + y * sin, -x * sin + y * cos);
    let slot_of = |npc: &Npc<T>| {
        let (rel_s, rel_d) = rotate(npc.state.s - ego.s, npc.state.d - ego.d);
        let (vs, vd) = npc.state.velocity();
        let (rel_v_long, rel_v_lat) = rotate(vs - ego_vs, vd - ego_vd);
        NpcSlot {
            npc_id: Some(npc.id),
            rel_s,
            rel_d,
            rel_v_long,
            rel_v_lat,
        }
    };

    let far = T::lit(config.far_distance);
    let mut slots = vec![NpcSlot::empty(far); config.slots.max(2)];
    let leader = nearest_ahead(world, Lane::Ego);
    let oncoming = nearest_ahead(world, Lane::Opposite);
    if let Some(npc) = leader {
        slots[0] = slot_of(npc);
    }
    if let Some(npc) = oncoming {
        slots[1] = slot_of(npc);
    }
    let taken = [leader.map(|n| n.id), oncoming.map(|n| n.id)];
    let mut rest: Vec<&Npc<T>> = world
        .npcs
        .iter()
        .filter(|n| !taken.contains(&Some(n.id)))
        .collect();
    rest.sort_by(by_gap(world));
    for (slot, npc) in slots.iter_mut().skip(2).zip(rest) {
        *slot = slot_of(npc);
    }

    Observation {
        ego_speed: ego.speed,
        ego_yaw_rate: ego.yaw_rate,
        ego_lateral: ego.d - road.ego_lane_center_d(),
        slots,
    }
}
