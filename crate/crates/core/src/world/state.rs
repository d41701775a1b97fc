use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::world::collision::check_collision;
use crate::world::road::{Lane, RoadModel};
use crate::world::vehicle::{step_ego, step_npc, KinematicLimits, VehicleState};

/// A scripted constant-speed traffic participant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Npc<T> {
    pub id: u32,
    pub state: VehicleState<T>,
    pub lane: Lane,
    pub target_speed: T,
}

impl<T: Scalar> Npc<T> {
    /// Places an NPC on its lane centerline facing its direction of travel.
    pub fn on_lane(id: u32, road: &RoadModel<T>, lane: Lane, s: T, speed: T, length: T, width: T) -> Self {
        let heading = match lane {
            Lane::Ego => T::zero(),
            Lane::Opposite => T::PI(),
        };
        Self {
            id,
            state: VehicleState::new(s, road.lane_center(lane), speed, length, width).with_heading(heading),
            lane,
            target_speed: speed,
        }
    }

    /// Signed longitudinal velocity along `s`.
    pub fn longitudinal_velocity(&self) -> T {
        match self.lane {
            Lane::Ego => self.target_speed,
            Lane::Opposite => -self.target_speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Collision { npc_id: u32 },
    GoalReached,
    OffRoad,
    Timeout,
}

/// Episode result class; exactly one per finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Crash { npc_id: u32 },
    OffRoad,
    Timeout,
}

impl Outcome {
    pub fn label(&self) -> String {
        match self {
            Outcome::Success => "success".into(),
            Outcome::Crash { npc_id } => format!("crash_npc{npc_id}"),
            Outcome::OffRoad => "off_road".into(),
            Outcome::Timeout => "timeout".into(),
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }
}

impl From<EventKind> for Outcome {
    fn from(kind: EventKind) -> Self {
        match kind {
            EventKind::Collision { npc_id } => Outcome::Crash { npc_id },
            EventKind::GoalReached => Outcome::Success,
            EventKind::OffRoad => Outcome::OffRoad,
            EventKind::Timeout => Outcome::Timeout,
        }
    }
}

/// Terminal world event. Every kind ends the episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldEvent<T> {
    pub kind: EventKind,
    pub time: T,
}

/// Fixed physical parameters of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldParams<T> {
    pub road: RoadModel<T>,
    pub limits: KinematicLimits<T>,
    pub dt: T,
    pub t_max: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState<T> {
    pub time: T,
    pub ego: VehicleState<T>,
    pub npcs: Vec<Npc<T>>,
    pub events: Vec<WorldEvent<T>>,
    /// Lane of the roll-out most recently selected by the local planner.
    pub target_lane: Lane,
}

impl<T: Scalar> WorldState<T> {
    pub fn new(ego: VehicleState<T>, npcs: Vec<Npc<T>>) -> Result<Self> {
        let mut ids: Vec<u32> = npcs.iter().map(|n| n.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate npc ids in {ids:?}")));
        }
        if ego.speed < T::zero() || ego.length <= T::zero() || ego.width <= T::zero() || !ego.is_finite() {
            return Err(Error::Validation(format!("invalid ego state {ego:?}")));
        }
        Ok(Self {
            time: T::zero(),
            ego,
            npcs,
            events: Vec::new(),
            target_lane: Lane::Ego,
        })
    }

    pub fn terminal_event(&self) -> Option<&WorldEvent<T>> {
        self.events.first()
    }

    pub fn is_terminated(&self) -> bool {
        !self.events.is_empty()
    }

    pub fn npc(&self, id: u32) -> Option<&Npc<T>> {
        self.npcs.iter().find(|n| n.id == id)
    }
}

/// Advances ego and traffic by one physics step and emits at most one
/// terminal event. Priority when several conditions hold at once:
/// collision, off-road, goal, timeout.
pub fn step_world<T: Scalar>(
    world: &WorldState<T>,
    steering: T,
    accel: T,
    params: &WorldParams<T>,
) -> Result<WorldState<T>> {
    if let Some(event) = world.terminal_event() {
        return Err(Error::Terminated {
            time: event.time.to_f64_lossy(),
        });
    }
    let ego = step_ego(&world.ego, steering, accel, params.dt, &params.limits)?;
    let npcs = world
        .npcs
        .iter()
        .map(|npc| Npc {
            state: step_npc(&npc.state, npc.lane, npc.target_speed, params.dt),
            ..*npc
        })
        .collect::<Vec<_>>();
    let time = world.time + params.dt;

    let road = &params.road;
    let (d_lo, d_hi) = road.drivable_band();
    let kind = if let Some(hit) = npcs.iter().find(|npc| check_collision(&ego, &npc.state)) {
        Some(EventKind::Collision { npc_id: hit.id })
    } else if ego.d < d_lo || ego.d > d_hi {
        Some(EventKind::OffRoad)
    } else if ego.s >= road.goal_s() && ego.d.abs() <= road.lane_width() / T::lit(4.0) {
        Some(EventKind::GoalReached)
    } else if time >= params.t_max {
        Some(EventKind::Timeout)
    } else {
        None
    };

    Ok(WorldState {
        time,
        ego,
        npcs,
        events: kind.map(|kind| WorldEvent { kind, time }).into_iter().collect(),
        target_lane: world.target_lane,
    })
}
