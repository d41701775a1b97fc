//! Separating-axis overlap test for vehicle footprints.

use crate::scalar::Scalar;
use crate::world::vehicle::VehicleState;

/// Footprint rectangle centered at `(s, d)` and rotated by `heading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect<T> {
    pub center: [T; 2],
    pub half_length: T,
    pub half_width: T,
    pub heading: T,
}

impl<T: Scalar> OrientedRect<T> {
    pub fn of(vehicle: &VehicleState<T>) -> Self {
        Self::at(vehicle.s, vehicle.d, vehicle.heading, vehicle.length, vehicle.width)
    }

    pub fn at(s: T, d: T, heading: T, length: T, width: T) -> Self {
        let half = T::lit(0.5);
        Self {
            center: [s, d],
            half_length: length * half,
            half_width: width * half,
            heading,
        }
    }

    /// Unit vectors along the rectangle's length and width.
    pub fn axes(&self) -> [[T; 2]; 2] {
        let (sin, cos) = self.heading.sin_cos();
        [[cos, sin], [-sin, cos]]
    }

    pub fn corners(&self) -> [[T; 2]; 4] {
        let [u, v] = self.axes();
        let (l, w) = (self.half_length, self.half_width);
        let [cx, cy] = self.center;
        let corner = |a: T, b: T| [cx + u[0] * a + v[0] * b, cy + u[1] * a + v[1] * b];
        [corner(l, w), corner(-l, w), corner(-l, -w), corner(l, -w)]
    }

    /// Half extent of the rectangle's projection onto unit `axis`.
    fn projected_radius(&self, axis: [T; 2]) -> T {
        let [u, v] = self.axes();
        self.half_length * dot(u, axis).abs() + self.half_width * dot(v, axis).abs()
    }

    fn bounding_radius(&self) -> T {
        self.half_length.hypot(self.half_width)
    }
}

#[inline]
fn dot<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

/// Largest projected gap between the two rectangles over the four face
/// normals. Positive values separate the footprints; a negative value is the
/// smallest overlap depth across those axes.
pub fn separation<T: Scalar>(a: &OrientedRect<T>, b: &OrientedRect<T>) -> T {
    let offset = [b.center[0] - a.center[0], b.center[1] - a.center[1]];
    let [a0, a1] = a.axes();
    let [b0, b1] = b.axes();
    [a0, a1, b0, b1]
        .into_iter()
        .map(|axis| dot(offset, axis).abs() - a.projected_radius(axis) - b.projected_radius(axis))
        .fold(T::neg_infinity(), T::max)
}

pub fn rects_overlap<T: Scalar>(a: &OrientedRect<T>, b: &OrientedRect<T>) -> bool {
    let dx = b.center[0] - a.center[0];
    let dy = b.center[1] - a.center[1];
    let reach = a.bounding_radius() + b.bounding_radius();
    if dx * dx + dy * dy >= reach * reach {
        return false;
    }
    separation(a, b) < T::zero()
}

/// True iff the two vehicle footprints overlap. Touching edges do not count.
pub fn check_collision<T: Scalar>(a: &VehicleState<T>, b: &VehicleState<T>) -> bool {
    rects_overlap(&OrientedRect::of(a), &OrientedRect::of(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn car(s: f64, d: f64, heading: f64) -> VehicleState<f64> {
        VehicleState::new(s, d, 0.0, 4.0, 1.8).with_heading(heading)
    }

    #[test]
    fn identical_poses_overlap() {
        assert!(check_collision(&car(3.0, 1.0, 0.3), &car(3.0, 1.0, 0.3)));
    }

    #[test]
    fn adjacent_lanes_are_disjoint() {
        assert!(!check_collision(&car(10.0, 0.0, 0.0), &car(10.0, 3.0, 0.0)));
        assert!(!check_collision(&car(10.0, 0.0, 0.0), &car(10.0, 3.0, std::f64::consts::PI)));
    }

    #[test]
    fn touching_is_not_overlap() {
        assert!(!check_collision(&car(0.0, 0.0, 0.0), &car(4.0, 0.0, 0.0)));
        assert!(check_collision(&car(0.0, 0.0, 0.0), &car(3.999, 0.0, 0.0)));
    }

    #[test]
    fn corner_cases_need_the_rotated_axes() {
        // Axis-aligned boxes would overlap; the rotated one clears the corner.
        let a = car(0.0, 0.0, 0.0);
        let b = car(3.9, 2.0, std::f64::consts::FRAC_PI_4);
        assert!(separation(&OrientedRect::of(&a), &OrientedRect::of(&b)) > 0.0);
        assert!(!check_collision(&a, &b));
    }

    #[test]
    fn separation_matches_gap_for_aligned_boxes() {
        let a = OrientedRect::of(&car(0.0, 0.0, 0.0));
        let b = OrientedRect::of(&car(10.0, 0.0, 0.0));
        assert!((separation(&a, &b) - 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn collision_is_symmetric(
            s1 in -10.0..10.0f64, d1 in -4.0..4.0f64, h1 in -3.2..3.2f64,
            s2 in -10.0..10.0f64, d2 in -4.0..4.0f64, h2 in -3.2..3.2f64,
            l in 0.5..6.0f64, w in 0.5..3.0f64,
        ) {
            let a = VehicleState::new(s1, d1, 0.0, l, w).with_heading(h1);
            let b = VehicleState::new(s2, d2, 0.0, w + 1.0, l).with_heading(h2);
            prop_assert_eq!(check_collision(&a, &b), check_collision(&b, &a));
        }
    }
}
