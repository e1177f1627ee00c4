//! Quasi-static object/table world.
//!
//! The grasped object is rigidly attached to the EE. Contact with the table
//! is a bed of unilateral springs, one per support point, so the normal load
//! and the centre of pressure follow from penetration. The EE origin is the
//! force application point; every wrench here is the external wrench on the
//! object expressed at that point in the robot frame.

use nalgebra::{Point2, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{Pose6, Wrench};

pub const GRAVITY: f64 = 9.81;

/// Penetration used to normalise the soft-object attenuation, m.
pub const COMPLIANCE_REFERENCE: f64 = 1e-3;

/// Beyond this tilt the object counts as toppled regardless of geometry.
pub const MAX_TILT: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactType {
    FlatFace,
    PointSet,
}

/// Object geometry in its own frame: base plane `z = 0`, support points
/// given in that plane (or as 3D points for point contacts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidObjectSpec {
    pub name: String,
    /// Convex base outline, counter-clockwise or clockwise, m.
    pub support_polygon: Vec<[f64; 2]>,
    pub height: f64,
    pub grasp_height: f64,
    /// Centre of mass relative to the support centroid, m.
    pub com_offset: [f64; 3],
    pub contact_type: ContactType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_contacts: Option<Vec<[f64; 3]>>,
    /// Series compliance of the object at the contact, m/N.
    #[serde(default)]
    pub compliance: f64,
    pub mass: f64,
    /// Free-surface travel of a liquid fill: the centre of mass drifts up to
    /// this far toward the low side, m.
    #[serde(default)]
    pub liquid_shift: f64,
}

impl RigidObjectSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("object `{}`: {m}", self.name)));
        match self.contact_type {
            ContactType::FlatFace => {
                if self.support_polygon.len() < 3 {
                    return bad("support polygon needs at least 3 vertices");
                }
                if !(polygon_area(&self.support_polygon).abs() > 1e-10) {
                    return bad("support polygon has zero area");
                }
                if !is_convex(&self.support_polygon) {
                    return bad("support polygon is not convex");
                }
            }
            ContactType::PointSet => match &self.point_contacts {
                Some(p) if !p.is_empty() => {}
                _ => return bad("point_set objects need at least one contact point"),
            },
        }
        if !(self.grasp_height > 0.0 && self.grasp_height <= self.height) {
            return bad("grasp height must lie in (0, height]");
        }
        if !(self.mass > 0.0) {
            return bad("mass must be > 0");
        }
        if !(self.compliance >= 0.0) || !(self.liquid_shift >= 0.0) {
            return bad("compliance and liquid_shift must be >= 0");
        }
        if !self.com_offset.iter().all(|v| v.is_finite()) {
            return bad("com_offset must be finite");
        }
        Ok(())
    }

    /// Support points in the object frame.
    pub fn support_points(&self) -> Vec<Vector3<f64>> {
        match self.contact_type {
            ContactType::FlatFace => {
                self.support_polygon.iter().map(|p| Vector3::new(p[0], p[1], 0.0)).collect()
            }
            ContactType::PointSet => self
                .point_contacts
                .iter()
                .flatten()
                .map(|p| Vector3::new(p[0], p[1], p[2]))
                .collect(),
        }
    }

    /// Mean of the support points projected onto the base plane.
    pub fn centroid(&self) -> Vector2<f64> {
        let pts = self.support_points();
        let sum: Vector2<f64> = pts.iter().map(|p| p.xy()).sum();
        sum / pts.len() as f64
    }

    /// EE origin in the object frame.
    pub fn grasp_point(&self) -> Vector3<f64> {
        let c = self.centroid();
        Vector3::new(c.x, c.y, self.grasp_height)
    }

    pub fn com(&self) -> Vector3<f64> {
        let c = self.centroid();
        Vector3::new(c.x, c.y, 0.0) + Vector3::from(self.com_offset)
    }

    /// Tipping angle about a straight support edge at distance `half_width`
    /// from the centroid, for the unshifted centre of mass.
    pub fn tipping_angle(&self, half_width: f64) -> f64 {
        (half_width / self.com_offset[2]).atan()
    }
}

/// Signed shoelace area.
fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn is_convex(p: &[[f64; 2]]) -> bool {
    let n = p.len();
    let mut sign = 0.0;
    for i in 0..n {
        let (a, b, c) = (p[i], p[(i + 1) % n], p[(i + 2) % n]);
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross.abs() < 1e-14 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, collinear
/// points dropped.
pub fn convex_hull(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2<f64>, a: Point2<f64>, b: Point2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut hull: Vec<Point2<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<f64>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Whether `q` lies inside or on a counter-clockwise convex hull.
pub fn hull_contains(hull: &[Point2<f64>], q: &Point2<f64>) -> bool {
    match hull.len() {
        0 => false,
        1 => (hull[0] - q).norm() < 1e-12,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let ab = b - a;
            let t = (q - a).dot(&ab) / ab.norm_squared();
            (0.0..=1.0).contains(&t) && (a + ab * t - q).norm() < 1e-12
        }
        n => (0..n).all(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x) >= -1e-15
        }),
    }
}

/// Contact parameters shared by every object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactModel {
    /// Total table stiffness, N/m.
    pub table_stiffness: f64,
}

impl Default for ContactModel {
    fn default() -> Self {
        Self { table_stiffness: 5e3 }
    }
}

impl ContactModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.table_stiffness > 0.0 && self.table_stiffness.is_finite()) {
            return Err(Error::InvalidConfig("contact.table_stiffness must be > 0".into()));
        }
        Ok(())
    }

    /// Series combination of table and object stiffness.
    pub fn effective_stiffness(&self, spec: &RigidObjectSpec) -> f64 {
        1.0 / (1.0 / self.table_stiffness + spec.compliance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub object_pose: Pose6,
    pub ee_pose: Pose6,
    pub attached: bool,
    pub table_height: f64,
    /// Normal load on the table, N.
    pub press_force_z: f64,
    /// Liquid centre-of-mass drift in the object frame, m.
    pub com_shift: Vector2<f64>,
    pub contact: ContactModel,
}

impl WorldState {
    /// Object held with its EE at `ee_pose`.
    pub fn grasped(spec: &RigidObjectSpec, ee_pose: Pose6, table_height: f64, contact: ContactModel) -> Self {
        let mut s = Self {
            object_pose: ee_pose,
            ee_pose,
            attached: true,
            table_height,
            press_force_z: 0.0,
            com_shift: Vector2::zeros(),
            contact,
        };
        s.sync_object(spec);
        s.press_force_z = contact_state(spec, &s).normal_force;
        s
    }

    /// Object standing flat on the table with the given yaw, just touching.
    pub fn resting(spec: &RigidObjectSpec, yaw: f64, table_height: f64, contact: ContactModel) -> Self {
        let min_z = spec.support_points().iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        let rot = Rotation3::from_euler_angles(0.0, 0.0, yaw);
        let obj_pos = Vector3::new(0.0, 0.0, table_height - min_z);
        let ee = Pose6::from_rotation(obj_pos + rot * spec.grasp_point(), rot);
        Self::grasped(spec, ee, table_height, contact)
    }

    fn sync_object(&mut self, spec: &RigidObjectSpec) {
        let r = self.ee_pose.orientation;
        self.object_pose = Pose6::from_rotation(self.ee_pose.position - r * spec.grasp_point(), r);
    }

    /// Centre of mass in the robot frame, including liquid drift.
    pub fn com_world(&self, spec: &RigidObjectSpec) -> Vector3<f64> {
        let local = spec.com() + Vector3::new(self.com_shift.x, self.com_shift.y, 0.0);
        self.object_pose.transform_point(&local)
    }

    /// Angle between the object's base normal and the vertical.
    pub fn tilt(&self) -> f64 {
        let z = self.object_pose.orientation * Vector3::z();
        z.z.clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactReport {
    pub in_contact: bool,
    /// Penetrating support points, robot frame.
    pub contact_points: Vec<Vector3<f64>>,
    /// Per-axis lever `(x, y)` of the EE origin about the centre of pressure:
    /// the torque about axis i is `normal_force * lever_arm[i]`.
    pub lever_arm: Vector2<f64>,
    pub normal_force: f64,
    /// Centre of pressure, robot frame.
    pub center_of_pressure: Vector3<f64>,
}

pub fn contact_state(spec: &RigidObjectSpec, state: &WorldState) -> ContactReport {
    let pts = spec.support_points();
    let k_each = state.contact.effective_stiffness(spec) / pts.len() as f64;
    let mut weight = 0.0;
    let mut cop = Vector3::zeros();
    let mut contact_points = Vec::new();
    for p in &pts {
        let w = state.object_pose.transform_point(p);
        let depth = state.table_height - w.z;
        if depth > 0.0 {
            weight += depth;
            cop += w * depth;
            contact_points.push(w);
        }
    }
    if contact_points.is_empty() {
        return ContactReport {
            in_contact: false,
            contact_points,
            lever_arm: Vector2::zeros(),
            normal_force: 0.0,
            center_of_pressure: Vector3::zeros(),
        };
    }
    cop /= weight;
    let d = state.ee_pose.position - cop;
    ContactReport {
        in_contact: true,
        contact_points,
        lever_arm: Vector2::new(-d.y, d.x),
        normal_force: k_each * weight,
        center_of_pressure: cop,
    }
}

/// Torque attenuation of a soft object under load.
pub fn compliance_attenuation(spec: &RigidObjectSpec, normal_force: f64) -> f64 {
    1.0 / (1.0 + spec.compliance * normal_force / COMPLIANCE_REFERENCE)
}

/// Table reaction at the force application point: `+N` on `z` and the
/// corrective torque `N * lever` on roll and pitch. A positive pitch torque
/// is clockwise when drawn with `x` to the right and `z` up.
pub fn corrective_wrench(spec: &RigidObjectSpec, state: &WorldState) -> Result<Wrench> {
    let c = contact_state(spec, state);
    if !c.in_contact || !(c.normal_force > 0.0) {
        return Err(Error::NotInContact);
    }
    let n = c.normal_force;
    let t = c.lever_arm * (n * compliance_attenuation(spec, n));
    Ok(Wrench::new(Vector3::new(0.0, 0.0, n), Vector3::new(t.x, t.y, 0.0)))
}

/// Weight of the object about the force application point.
pub fn gravity_wrench(spec: &RigidObjectSpec, state: &WorldState) -> Wrench {
    let f = Vector3::new(0.0, 0.0, -spec.mass * GRAVITY);
    let r = state.com_world(spec) - state.ee_pose.position;
    Wrench::new(f, r.cross(&f))
}

/// Everything the grasp transmits to the fingertips: weight plus table
/// reaction (zero when airborne).
pub fn external_wrench(spec: &RigidObjectSpec, state: &WorldState) -> Wrench {
    gravity_wrench(spec, state) + corrective_wrench(spec, state).unwrap_or_default()
}

/// Euler step of the EE twist `[vx, vy, vz, wx, wy, wz]` with rotation
/// about the EE origin; the object follows rigidly.
pub fn step(spec: &RigidObjectSpec, state: &WorldState, ee_twist: &[f64; 6], dt: f64) -> WorldState {
    assert!(dt > 0.0, "dt must be positive");
    let mut next = state.clone();
    let v = Vector3::new(ee_twist[0], ee_twist[1], ee_twist[2]);
    let w = Vector3::new(ee_twist[3], ee_twist[4], ee_twist[5]);
    let rot = Rotation3::new(w * dt) * state.ee_pose.orientation;
    next.ee_pose = Pose6::from_rotation(state.ee_pose.position + v * dt, rot);
    if next.attached {
        next.sync_object(spec);
    }
    if spec.liquid_shift > 0.0 {
        let (roll, pitch, _) = next.object_pose.rpy();
        let target = Vector2::new(pitch.sin(), -roll.sin()) * spec.liquid_shift;
        let a = 1.0 - (-dt / LIQUID_TIME_CONSTANT).exp();
        next.com_shift += (target - next.com_shift) * a;
    }
    next.press_force_z = contact_state(spec, &next).normal_force;
    next
}

/// First-order lag of the liquid centre of mass, s.
pub const LIQUID_TIME_CONSTANT: f64 = 0.5;

/// True if the object, released at its current pose, would fall over: the
/// gravity line leaves the projected support region, or tilt exceeds 45°.
pub fn topple_check(spec: &RigidObjectSpec, state: &WorldState) -> bool {
    if state.tilt() > MAX_TILT {
        return true;
    }
    let support: Vec<Point2<f64>> = spec
        .support_points()
        .iter()
        .map(|p| {
            let w = state.object_pose.transform_point(p);
            Point2::new(w.x, w.y)
        })
        .collect();
    let hull = convex_hull(&support);
    let com = state.com_world(spec);
    !hull_contains(&hull, &Point2::new(com.x, com.y))
}

/// Roll and pitch of the object relative to the table, degrees, on axes
/// yawed with the object.
pub fn placement_error(_spec: &RigidObjectSpec, state: &WorldState) -> (f64, f64) {
    let (roll, pitch, _) = state.object_pose.rpy();
    (roll.to_degrees(), pitch.to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_rect(grasp: f64) -> RigidObjectSpec {
        RigidObjectSpec {
            name: "small rectangular".into(),
            support_polygon: vec![[-0.015, -0.015], [0.015, -0.015], [0.015, 0.015], [-0.015, 0.015]],
            height: 0.07,
            grasp_height: grasp,
            com_offset: [0.0, 0.0, 0.035],
            contact_type: ContactType::FlatFace,
            point_contacts: None,
            compliance: 0.0,
            mass: 0.142,
            liquid_shift: 0.0,
        }
    }

    /// EE posed so the tilted object's lowest edge sits `depth` below the table.
    fn pitched(spec: &RigidObjectSpec, pitch: f64, depth: f64) -> WorldState {
        let rot = Rotation3::from_euler_angles(0.0, pitch, 0.0);
        let lowest = spec
            .support_points()
            .iter()
            .map(|p| (rot * p).z)
            .fold(f64::INFINITY, f64::min);
        let obj = Vector3::new(0.0, 0.0, -lowest - depth);
        let ee = Pose6::from_rotation(obj + rot * spec.grasp_point(), rot);
        WorldState::grasped(spec, ee, 0.0, ContactModel::default())
    }

    #[test]
    fn flat_object_has_zero_lever() {
        let s = small_rect(0.025);
        let st = pitched(&s, 0.0, 1e-4);
        let c = contact_state(&s, &st);
        assert!(c.in_contact);
        assert_eq!(c.contact_points.len(), 4);
        assert_abs_diff_eq!(c.lever_arm.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lever_arm.y, 0.0, epsilon = 1e-15);
        let k = ContactModel::default().table_stiffness;
        assert_abs_diff_eq!(c.normal_force, k * 1e-4, epsilon = 1e-9);
    }

    #[test]
    fn pitched_rectangle_lever_by_planar_trigonometry() {
        let s = small_rect(0.025);
        let th = 10f64.to_radians();
        let st = pitched(&s, th, 1e-4);
        let c = contact_state(&s, &st);
        // Positive pitch lowers the +x edge; the EE sits at grasp height on
        // the centre line. Horizontal offset EE - edge:
        let expected = 0.025 * th.sin() - 0.015 * th.cos();
        assert_eq!(c.contact_points.len(), 2);
        assert_abs_diff_eq!(c.lever_arm.y, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(c.lever_arm.x, 0.0, epsilon = 1e-12);
        let w = corrective_wrench(&s, &st).unwrap();
        assert!(w.torque.y < 0.0);
        assert_abs_diff_eq!(w.torque.y, c.normal_force * expected, epsilon = 1e-12);
    }

    #[test]
    fn plumb_angle_zeroes_pitch_lever() {
        let s = small_rect(0.025);
        let plumb = (0.015f64 / 0.025).atan();
        let c = contact_state(&s, &pitched(&s, plumb, 1e-4));
        assert_abs_diff_eq!(c.lever_arm.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn corrective_wrench_arithmetic_and_symmetry() {
        let s = small_rect(0.025);
        let a = corrective_wrench(&s, &pitched(&s, 0.1, 1e-4)).unwrap();
        let b = corrective_wrench(&s, &pitched(&s, -0.1, 1e-4)).unwrap();
        assert_abs_diff_eq!(a.torque.y, -b.torque.y, epsilon = 1e-12);
        assert!(matches!(corrective_wrench(&s, &pitched(&s, 0.1, -1e-3)), Err(Error::NotInContact)));
    }

    #[test]
    fn step_examples() {
        let s = small_rect(0.025);
        let st = pitched(&s, 0.0, -0.02);
        assert_eq!(step(&s, &st, &[0.0; 6], 0.005), st);
        let mut t = st.clone();
        for _ in 0..200 {
            t = step(&s, &t, &[0.0, 0.0, -0.005, 0.0, 0.0, 0.0], 0.005);
        }
        assert_abs_diff_eq!(t.ee_pose.position.z, st.ee_pose.position.z - 0.005, epsilon = 1e-12);
        let r = step(&s, &st, &[0.0, 0.0, 0.0, 0.0, 0.2, 0.0], 0.005);
        assert_abs_diff_eq!(r.ee_pose.position, st.ee_pose.position, epsilon = 1e-15);
        assert_abs_diff_eq!(r.ee_pose.rpy().1, 0.001, epsilon = 1e-12);
    }

    #[test]
    fn topple_at_analytic_tipping_angle() {
        let s = small_rect(0.025);
        let tip = s.tipping_angle(0.015);
        assert!(!topple_check(&s, &pitched(&s, 0.0, 0.0)));
        assert!(!topple_check(&s, &pitched(&s, tip - 1e-3, 0.0)));
        assert!(topple_check(&s, &pitched(&s, tip + 1e-3, 0.0)));
    }

    #[test]
    fn placement_error_reads_rpy() {
        let s = small_rect(0.025);
        let rot = Rotation3::from_euler_angles(0.03, -0.02, 0.4);
        let st = WorldState::grasped(&s, Pose6::from_rotation(Vector3::new(0.0, 0.0, 0.3), rot), 0.0, ContactModel::default());
        let (r, p) = placement_error(&s, &st);
        assert_abs_diff_eq!(r, 0.03f64.to_degrees(), epsilon = 1e-9);
        assert_abs_diff_eq!(p, -0.02f64.to_degrees(), epsilon = 1e-9);
    }

    #[test]
    fn validation() {
        let mut s = small_rect(0.025);
        assert!(s.validate().is_ok());
        s.grasp_height = 0.08;
        assert!(s.validate().is_err());
        let mut s = small_rect(0.025);
        s.support_polygon = vec![[0.0, 0.0], [0.01, 0.0], [0.02, 0.0]];
        assert!(s.validate().is_err());
        let mut s = small_rect(0.025);
        s.support_polygon.swap(1, 2);
        assert!(s.validate().is_err());
    }

    #[test]
    fn hull_basics() {
        let pts: Vec<Point2<f64>> =
            [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)].iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!(hull_contains(&h, &Point2::new(0.5, 0.2)));
        assert!(!hull_contains(&h, &Point2::new(1.5, 0.2)));
    }
}
