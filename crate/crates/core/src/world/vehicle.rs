use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::world::road::Lane;

/// Pose, speed and footprint of one vehicle in road coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState<T> {
    pub s: T,
    pub d: T,
    /// Heading relative to the road axis, counter-clockwise toward `+d`.
    pub heading: T,
    pub speed: T,
    pub yaw_rate: T,
    pub length: T,
    pub width: T,
}

impl<T: Scalar> VehicleState<T> {
    /// Vehicle at `(s, d)` aligned with the road axis.
    pub fn new(s: T, d: T, speed: T, length: T, width: T) -> Self {
        Self {
            s,
            d,
            heading: T::zero(),
            speed,
            yaw_rate: T::zero(),
            length,
            width,
        }
    }

    pub fn with_heading(mut self, heading: T) -> Self {
        self.heading = heading;
        self
    }

    /// Velocity vector `(v_s, v_d)` in the road frame.
    pub fn velocity(&self) -> (T, T) {
        let (sin, cos) = self.heading.sin_cos();
        (self.speed * cos, self.speed * sin)
    }

    pub fn is_finite(&self) -> bool {
        [
            self.s,
            self.d,
            self.heading,
            self.speed,
            self.yaw_rate,
            self.length,
            self.width,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Bicycle-model limits shared by the ego vehicle's controllers and physics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicLimits<T> {
    pub wheelbase: T,
    pub steering_max: T,
    pub v_max: T,
}

impl<T: Scalar> KinematicLimits<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.wheelbase.is_finite()
            && self.steering_max.is_finite()
            && self.v_max.is_finite()
            && self.wheelbase > T::zero()
            && self.steering_max > T::zero()
            && self.steering_max < T::FRAC_PI_2()
            && self.v_max > T::zero();
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid kinematic limits {self:?}")))
        }
    }
}

impl Default for KinematicLimits<f64> {
    fn default() -> Self {
        Self {
            wheelbase: 2.8,
            steering_max: 0.5,
            v_max: 4.2,
        }
    }
}

/// Advances the ego vehicle one step of the kinematic bicycle model.
///
/// Speed is held at its step-start value while the pose moves along the
/// circular arc of radius `wheelbase / tan(steering)`; the position update
/// uses the exact chord of that arc, so constant-speed constant-steering
/// motion has no discretization error.
pub fn step_ego<T: Scalar>(
    state: &VehicleState<T>,
    steering: T,
    accel: T,
    dt: T,
    limits: &KinematicLimits<T>,
) -> Result<VehicleState<T>> {
    if !(state.is_finite() && steering.is_finite() && accel.is_finite() && dt.is_finite()) {
        return Err(Error::Validation("non-finite input to step_ego".into()));
    }
    limits.validate()?;
    if dt <= T::zero() {
        return Err(Error::Validation(format!("dt {dt} must be > 0")));
    }
    if steering.abs() > limits.steering_max + T::epsilon() {
        return Err(Error::Validation(format!(
            "steering {steering} exceeds limit {}",
            limits.steering_max
        )));
    }

    let arc = state.speed * dt;
    let dheading = arc * steering.tan() / limits.wheelbase;
    let heading = state.heading + dheading;
    let half = dheading / T::lit(2.0);
    let chord = if half.abs() < T::lit(1e-9) {
        arc
    } else {
        arc * half.sin() / half
    };
    let (sin_mid, cos_mid) = (state.heading + half).sin_cos();

    let mut next = *state;
    next.s = state.s + chord * cos_mid;
    next.d = state.d + chord * sin_mid;
    next.heading = heading;
    next.yaw_rate = dheading / dt;
    next.speed = (state.speed + accel * dt).max(T::zero()).min(limits.v_max);
    Ok(next)
}

/// Advances a constant-speed lane follower. Oncoming-lane vehicles move
/// toward decreasing `s`.
pub fn step_npc<T: Scalar>(npc: &VehicleState<T>, lane: Lane, target_speed: T, dt: T) -> VehicleState<T> {
    let mut next = *npc;
    let (direction, heading) = match lane {
        Lane::Ego => (T::one(), T::zero()),
        Lane::Opposite => (-T::one(), T::PI()),
    };
    next.s = npc.s + direction * target_speed * dt;
    next.heading = heading;
    next.speed = target_speed;
    next.yaw_rate = T::zero();
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car(speed: f64) -> VehicleState<f64> {
        VehicleState::new(0.0, 0.0, speed, 4.0, 1.8)
    }

    #[test]
    fn straight_line_step() {
        let next = step_ego(&car(2.0), 0.0, 0.0, 0.1, &KinematicLimits::default()).unwrap();
        assert!((next.s - 0.2).abs() < 1e-15);
        assert_eq!(next.d, 0.0);
        assert_eq!(next.heading, 0.0);
        assert_eq!(next.yaw_rate, 0.0);
    }

    #[test]
    fn braking_clamps_at_zero() {
        let limits = KinematicLimits::default();
        let mut state = car(2.0);
        for _ in 0..20 {
            state = step_ego(&state, 0.0, -10.0, 0.05, &limits).unwrap();
            assert!(state.speed >= 0.0);
        }
        assert_eq!(state.speed, 0.0);
    }

    #[test]
    fn speed_clamps_at_v_max() {
        let limits = KinematicLimits::default();
        let next = step_ego(&car(4.1), 0.0, 5.0, 0.1, &limits).unwrap();
        assert_eq!(next.speed, limits.v_max);
    }

    #[test]
    fn rejects_non_finite_and_bad_dt() {
        let limits = KinematicLimits::default();
        assert!(step_ego(&car(1.0), f64::NAN, 0.0, 0.1, &limits).is_err());
        assert!(step_ego(&car(1.0), 0.0, f64::INFINITY, 0.1, &limits).is_err());
        assert!(step_ego(&car(1.0), 0.0, 0.0, 0.0, &limits).is_err());
        assert!(step_ego(&car(1.0), 0.6, 0.0, 0.1, &limits).is_err());
    }

    #[test]
    fn yaw_rate_is_heading_change_over_dt() {
        let limits = KinematicLimits::default();
        let next = step_ego(&car(3.0), 0.2, 0.0, 0.05, &limits).unwrap();
        assert!((next.yaw_rate - next.heading / 0.05).abs() < 1e-12);
    }

    #[test]
    fn npc_moves_along_its_lane() {
        let npc = VehicleState::new(10.0, 0.0, 2.0, 4.0, 1.8);
        let next = step_npc(&npc, Lane::Ego, 2.0, 0.5);
        assert_eq!(next.s, 11.0);
        assert_eq!(next.d, 0.0);

        let oncoming = VehicleState::new(50.0, 3.0, 3.0, 4.0, 1.8);
        let next = step_npc(&oncoming, Lane::Opposite, 3.0, 0.5);
        assert_eq!(next.s, 48.5);
        assert_eq!(next.d, 3.0);
        assert_eq!(next.heading, std::f64::consts::PI);

        let parked = step_npc(&npc, Lane::Ego, 0.0, 0.5);
        assert_eq!(parked.s, 10.0);
    }

    #[test]
    fn works_in_single_precision() {
        let limits = KinematicLimits {
            wheelbase: 2.8f32,
            steering_max: 0.5,
            v_max: 4.2,
        };
        let state = VehicleState::new(0.0f32, 0.0, 2.0, 4.0, 1.8);
        let next = step_ego(&state, 0.1, 0.0, 0.05, &limits).unwrap();
        assert!(next.d > 0.0 && next.s > 0.09);
    }
}
