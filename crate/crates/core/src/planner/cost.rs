use crate::planner::params::{BehaviorParams, PlannerConfig};
use crate::planner::rollout::Rollout;
use crate::scalar::Scalar;
use crate::world::{separation, Npc, OrientedRect, WorldState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutCost<T> {
    pub id: usize,
    pub collision: T,
    pub transition: T,
    pub center: T,
    pub total: T,
    /// Whether any NPC's predicted footprint overlaps the path.
    pub overlaps: bool,
}

/// Lowest speed used to time the ego along a roll-out.
const MIN_PLAN_SPEED: f64 = 0.1;

/// Ego speed ramping from its current value to the behavior's cruise
/// velocity at the behavior's acceleration limit, then holding.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SpeedProfile<T> {
    v0: T,
    v1: T,
    accel: T,
}

impl<T: Scalar> SpeedProfile<T> {
    pub(crate) fn new(current: T, params: &BehaviorParams<T>) -> Self {
        let floor = T::lit(MIN_PLAN_SPEED);
        Self {
            v0: current.max(floor),
            v1: params.velocity.max(floor),
            accel: params.acceleration,
        }
    }

    /// Time to cover `x` metres.
    pub(crate) fn time_at(&self, x: T) -> T {
        let (v0, v1) = (self.v0, self.v1);
        let dv = v1 - v0;
        if dv == T::zero() {
            return x / v0;
        }
        let ramp_t = dv.abs() / self.accel;
        let ramp_x = (v0 + v1) * T::lit(0.5) * ramp_t;
        if x > ramp_x {
            return ramp_t + (x - ramp_x) / v1;
        }
        let a = if dv > T::zero() { self.accel } else { -self.accel };
        let disc = (v0 * v0 + T::lit(2.0) * a * x).max(T::zero());
        (disc.sqrt() - v0) / a
    }
}

/// Ego footprint and timestamp at every waypoint when driving the roll-out
/// with `profile`.
pub(crate) fn ego_samples<'a, T: Scalar>(
    rollout: &'a Rollout<T>,
    world: &WorldState<T>,
    profile: SpeedProfile<T>,
) -> impl Iterator<Item = (T, OrientedRect<T>)> + 'a {
    let start = rollout.waypoints.first().map(|w| w.s).unwrap_or(world.ego.s);
    let ego = world.ego;
    rollout.waypoints.iter().enumerate().map(move |(k, w)| {
        let t = profile.time_at(w.s - start);
        let rect = OrientedRect::at(w.s, w.d, rollout.heading_at(k), ego.length, ego.width);
        (t, rect)
    })
}

pub(crate) fn predicted_npc<T: Scalar>(npc: &Npc<T>, t: T) -> OrientedRect<T> {
    let s = npc.state.s + npc.longitudinal_velocity() * t;
    OrientedRect::at(s, npc.state.d, npc.state.heading, npc.state.length, npc.state.width)
}

/// Collision cost of one roll-out against one NPC and whether they overlap.
fn npc_cost<T: Scalar>(
    rollout: &Rollout<T>,
    world: &WorldState<T>,
    npc: &Npc<T>,
    params: &BehaviorParams<T>,
    config: &PlannerConfig,
    profile: SpeedProfile<T>,
) -> (T, bool) {
    let avoid = params.avoiding_distance;
    let scale = T::lit(config.clearance_scale);
    let mut penalty = T::zero();
    for (t, ego_rect) in ego_samples(rollout, world, profile) {
        let other = predicted_npc(npc, t);
        // NPC footprints are road-aligned, so the road axes are among the
        // separating axes and these gaps bound the SAT separation from below.
        let [u, v] = ego_rect.axes();
        let ego_rs = ego_rect.half_length * u[0].abs() + ego_rect.half_width * v[0].abs();
        let ego_rd = ego_rect.half_length * u[1].abs() + ego_rect.half_width * v[1].abs();
        let gap_s = (other.center[0] - ego_rect.center[0]).abs() - ego_rs - other.half_length;
        let gap_d = (other.center[1] - ego_rect.center[1]).abs() - ego_rd - other.half_width;
        if gap_s >= avoid || gap_d >= avoid {
            continue;
        }
        let clearance = separation(&ego_rect, &other);
        if clearance < T::zero() {
            // Sooner overlaps cost up to twice as much as distant ones.
            let urgency = T::one() + T::one() / (T::one() + t);
            return (T::lit(config.overlap_penalty) * urgency, true);
        }
        if clearance < avoid {
            penalty += (-clearance / scale).exp();
        }
    }
    (penalty, false)
}


/// Scores every roll-out and returns the costs with the selected id.
///
/// NPCs are predicted at constant velocity. The ego is timed along each
/// roll-out from its current speed, ramping to the behavior's cruise velocity
/// at the behavior's acceleration limit. Ties go to the lowest id.
pub fn evaluate_rollouts<T: Scalar>(
    rollouts: &[Rollout<T>],
    world: &WorldState<T>,
    params: &BehaviorParams<T>,
    config: &PlannerConfig,
) -> (Vec<RolloutCost<T>>, usize) {
    assert!(!rollouts.is_empty(), "evaluate_rollouts needs at least one roll-out");
    let profile = SpeedProfile::new(world.ego.speed, params);
    let w_c = T::lit(config.weight_collision);
    let w_t = T::lit(config.weight_transition) * params.transition_scale;
    let w_d = T::lit(config.weight_center);

    let costs: Vec<RolloutCost<T>> = rollouts
        .iter()
        .map(|rollout| {
            let mut collision = T::zero();
            let mut overlaps = false;
            for npc in &world.npcs {
                let (c, hit) = npc_cost(rollout, world, npc, params, config, profile);
                collision += c;
                overlaps |= hit;
            }
            let transition = (rollout.target_d - world.ego.d).abs();
            let center = rollout.target_d.abs();
            RolloutCost {
                id: rollout.id,
                collision,
                transition,
                center,
                total: w_c * collision + w_t * transition + w_d * center,
                overlaps,
            }
        })
        .collect();

    let selected = costs
        .iter()
        .fold(None::<&RolloutCost<T>>, |best, c| match best {
            Some(b) if c.total >= b.total => Some(b),
            _ => Some(c),
        })
        .map(|c| c.id)
        .expect("nonempty");
    (costs, selected)
}
