use crate::error::Result;
use crate::planner::params::{BehaviorParams, PlannerConfig};
use crate::scalar::Scalar;
use crate::world::VehicleState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint<T> {
    pub s: T,
    pub d: T,
}

/// Candidate path that blends from the ego's lateral offset to `target_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout<T> {
    pub id: usize,
    pub target_d: T,
    pub waypoints: Vec<Waypoint<T>>,
}

impl<T: Scalar> Rollout<T> {
    /// Heading of the path segment leaving waypoint `k`.
    pub fn heading_at(&self, k: usize) -> T {
        let n = self.waypoints.len();
        if n < 2 {
            return T::zero();
        }
        let k = k.min(n - 2);
        let (a, b) = (self.waypoints[k], self.waypoints[k + 1]);
        (b.d - a.d).atan2(b.s - a.s)
    }
}

/// Cubic blend on `[0, 1]` from 0 to 1, flat at the end, with initial slope
/// `alpha`. `alpha = 0` is the smoothstep `3x^2 - 2x^3`; any `alpha` in
/// `[0, 3]` keeps the blend monotone.
pub(crate) fn blend<T: Scalar>(x: T, alpha: T) -> T {
    let x = x.max(T::zero()).min(T::one());
    let step = x * x * (T::lit(3.0) - T::lit(2.0) * x);
    let tangent = x * (T::one() - x) * (T::one() - x);
    step + alpha * tangent
}

/// Normalised initial slope that continues the ego's current heading toward
/// `target_d`, or 0 when the heading points away.
fn start_slope<T: Scalar>(ego: &VehicleState<T>, target_d: T, transition: T) -> T {
    let delta = target_d - ego.d;
    if delta == T::zero() {
        return T::zero();
    }
    (ego.heading.tan() * transition / delta).max(T::zero()).min(T::lit(3.0))
}

/// Lateral targets spread evenly over the allowed range, ascending.
pub fn rollout_targets<T: Scalar>(params: &BehaviorParams<T>) -> Vec<T> {
    let (lo, hi) = params.lateral_range;
    let n = params.rollout_number;
    if n == 1 {
        return vec![(lo + hi) / T::lit(2.0)];
    }
    let step = (hi - lo) / T::lit((n - 1) as f64);
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * T::lit(i as f64) })
        .collect()
}

/// Samples `rollout_number` candidate paths from the ego's current position.
pub fn generate_rollouts<T: Scalar>(
    ego: &VehicleState<T>,
    params: &BehaviorParams<T>,
    config: &PlannerConfig,
) -> Result<Vec<Rollout<T>>> {
    params.validate()?;
    let spacing = T::lit(config.waypoint_spacing);
    let transition = T::lit(config.transition_length);
    let count = (config.horizon / config.waypoint_spacing).floor() as usize + 1;

    Ok(rollout_targets(params)
        .into_iter()
        .enumerate()
        .map(|(id, target_d)| {
            let alpha = start_slope(ego, target_d, transition);
            let waypoints = (0..count)
                .map(|k| {
                    let along = spacing * T::lit(k as f64);
                    let w = blend(along / transition, alpha);
                    Waypoint {
                        s: ego.s + along,
                        d: ego.d * (T::one() - w) + target_d * w,
                    }
                })
                .collect();
            Rollout { id, target_d, waypoints }
        })
        .collect())
}
