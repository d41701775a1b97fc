//! Lateral and longitudinal tracking controllers.

use crate::planner::params::{BehaviorParams, PlannerConfig};
use crate::planner::rollout::Rollout;
use crate::scalar::Scalar;
use crate::world::{KinematicLimits, VehicleState, WorldState};

/// Pure pursuit steering toward the roll-out waypoint whose distance from
/// the ego is closest to `lookahead`, considering only waypoints ahead.
pub fn pure_pursuit<T: Scalar>(
    ego: &VehicleState<T>,
    rollout: &Rollout<T>,
    lookahead: T,
    limits: &KinematicLimits<T>,
) -> T {
    let target = rollout
        .waypoints
        .iter()
        .filter(|w| w.s > ego.s)
        .map(|w| {
            let (ds, dd) = (w.s - ego.s, w.d - ego.d);
            ((ds.hypot(dd) - lookahead).abs(), ds, dd)
        })
        .fold(None::<(T, T, T)>, |best, cand| match best {
            Some(b) if cand.0 >= b.0 => Some(b),
            _ => Some(cand),
        });
    let Some((_, ds, dd)) = target else {
        return T::zero();
    };
    let alpha = dd.atan2(ds) - ego.heading;
    let steering = (T::lit(2.0) * limits.wheelbase * alpha.sin() / lookahead).atan();
    steering.max(-limits.steering_max).min(limits.steering_max)
}

/// Nearest same-direction vehicle ahead on the tracked path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader<T> {
    pub npc_id: u32,
    /// Bumper-to-bumper distance; negative when the footprints already overlap.
    pub gap: T,
    pub speed: T,
}

/// Lateral offset of `path` at arc length `s`, linearly interpolated and
/// held constant beyond either end.
fn path_d_at<T: Scalar>(path: &Rollout<T>, s: T) -> T {
    let w = &path.waypoints;
    match w.iter().position(|p| p.s >= s) {
        None => w.last().map_or(path.target_d, |p| p.d),
        Some(0) => w[0].d,
        Some(k) => {
            let (a, b) = (w[k - 1], w[k]);
            a.d + (b.d - a.d) * (s - a.s) / (b.s - a.s)
        }
    }
}

/// A vehicle leads when the path passes it laterally within the corridor,
/// or when it is closer than `emergency_gap` in the ego's current corridor.
pub fn find_leader<T: Scalar>(world: &WorldState<T>, path: &Rollout<T>, config: &PlannerConfig) -> Option<Leader<T>> {
    let ego = &world.ego;
    let margin = T::lit(config.corridor_margin);
    let emergency = T::lit(config.emergency_gap);
    let half = T::lit(0.5);
    world
        .npcs
        .iter()
        .filter(|npc| npc.state.s > ego.s && npc.longitudinal_velocity() >= T::zero())
        .map(|npc| {
            let corridor = (ego.width + npc.state.width) * half + margin;
            let gap = npc.state.s - ego.s - (ego.length + npc.state.length) * half;
            let on_path = (npc.state.d - path_d_at(path, npc.state.s)).abs() < corridor;
            let close = gap < emergency && (npc.state.d - ego.d).abs() < corridor;
            (npc, gap, on_path || close)
        })
        .filter(|&(_, _, leads)| leads)
        .map(|(npc, gap, _)| Leader {
            npc_id: npc.id,
            gap,
            speed: npc.longitudinal_velocity(),
        })
        .fold(None::<Leader<T>>, |best, cand| match best {
            Some(b) if cand.gap >= b.gap => Some(b),
            _ => Some(cand),
        })
}

/// Speed tracking with gap regulation behind a leader, clamped to the
/// behavior's acceleration limit.
pub fn longitudinal_control<T: Scalar>(
    ego: &VehicleState<T>,
    leader: Option<&Leader<T>>,
    params: &BehaviorParams<T>,
    config: &PlannerConfig,
) -> T {
    let k_v = T::lit(config.gain_speed);
    let k_g = T::lit(config.gain_gap);
    let limit = params.acceleration;
    let cruise = k_v * (params.velocity - ego.speed);
    let command = match leader {
        Some(l) if l.gap < T::zero() => -limit,
        Some(l) => cruise.min(k_v * (l.speed - ego.speed) + k_g * (l.gap - params.following_distance)),
        None => cruise,
    };
    command.max(-limit).min(limit)
}
