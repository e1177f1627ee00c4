use approx::assert_abs_diff_eq;
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use tactile_placing::experiment::preplacing_world;
use tactile_placing::world::{contact_state, ContactType, corrective_wrench, external_wrench, step, topple_check, ContactModel};
use tactile_placing::{Catalog, Pose6, RigidObjectSpec, SimConfig, WorldState};

fn object(name: &str) -> RigidObjectSpec {
    Catalog::default().get(name).unwrap().clone()
}

/// Held at the given tilt and pushed `depth` below first contact.
fn pressed(spec: &RigidObjectSpec, roll: f64, pitch: f64, depth: f64) -> WorldState {
    let cfg = SimConfig::default();
    let w = preplacing_world(spec, roll, pitch, &cfg);
    step(spec, &w, &[0.0, 0.0, -(cfg.controller.approach_clearance + depth), 0.0, 0.0, 0.0], 1.0)
}

/// Net opposition holds everywhere. Per axis it holds for flat faces; a
/// single vertex of a point set can sit off to one side of the tilt axis.
#[test]
fn corrective_torque_opposes_tilt_for_every_object() {
    for spec in Catalog::default().objects {
        for (r, p) in [(5.0, 5.0), (-5.0, 5.0), (5.0, -5.0), (-5.0, -5.0), (8.0, 0.0), (0.0, -8.0)] {
            let w = pressed(&spec, r, p, 0.0005);
            let t = corrective_wrench(&spec, &w).unwrap().torque;
            if spec.contact_type == ContactType::FlatFace {
                assert!(t.x * r <= 1e-15 && t.y * p <= 1e-15, "{} ({r}, {p}): {t:?}", spec.name);
            }
            assert!(t.x * r + t.y * p < 0.0, "{} ({r}, {p})", spec.name);
        }
    }
}

#[test]
fn uniform_press_follows_series_stiffness() {
    let k = ContactModel::default().table_stiffness;
    for name in ["large rectangular", "hand cream tube"] {
        let spec = object(name);
        let depth = 0.0004;
        let w = pressed(&spec, 0.0, 0.0, depth);
        let keff = 1.0 / (1.0 / k + spec.compliance);
        let c = contact_state(&spec, &w);
        assert_eq!(c.contact_points.len(), spec.support_points().len());
        assert_abs_diff_eq!(c.normal_force, keff * depth, epsilon = 1e-9);
        // Centre of pressure under the grasp: no torque.
        assert!(corrective_wrench(&spec, &w).unwrap().torque.norm() < 1e-12);
    }
}

#[test]
fn airborne_object_only_weighs() {
    let spec = object("metal object");
    let w = preplacing_world(&spec, 3.0, -2.0, &SimConfig::default());
    assert!(!contact_state(&spec, &w).in_contact);
    assert!(corrective_wrench(&spec, &w).is_err());
    let e = external_wrench(&spec, &w);
    assert_abs_diff_eq!(e.force.z, -spec.mass * 9.81, epsilon = 1e-12);
}

/// Tilting about the grasp point moves the contact corner under the grasp
/// at `tan θ = w / g`; beyond that the reaction pushes the wrong way. The
/// wider block keeps the right sign over a wider band.
#[test]
fn corrective_sign_band_depends_on_width_and_grasp_height() {
    let mut bands = Vec::new();
    for (name, w) in [("small rectangular", 0.015), ("large rectangular", 0.025)] {
        let mut spec = object(name);
        spec.grasp_height = 0.025;
        let edge = (w / spec.grasp_height).atan().to_degrees();
        let t = |deg: f64| corrective_wrench(&spec, &pressed(&spec, 0.0, deg, 0.0003)).unwrap().torque.y;
        assert!(t(edge - 0.5) < 0.0 && t(edge + 0.5) > 0.0, "{name}");
        let (mut lo, mut hi) = (edge - 0.5, edge + 0.5);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if t(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - edge).to_radians().abs() < 1e-6, "{name}: {lo} vs {edge}");
        bands.push(edge);
    }
    assert!(bands[0] < bands[1]);
}

#[test]
fn topple_threshold_matches_plumb_line() {
    let spec = object("small rectangular");
    let (w, h) = (0.015, spec.com_offset[2]);
    let plumb = (w / h).atan();
    let mut state = WorldState::resting(&spec, 0.0, 0.0, ContactModel::default());
    for (theta, expect) in [(plumb - 1e-6, false), (plumb + 1e-6, true)] {
        state.object_pose = Pose6::from_rotation(Vector3::zeros(), Rotation3::from_euler_angles(0.0, theta, 0.0));
        assert_eq!(topple_check(&spec, &state), expect, "{theta}");
    }
}

#[test]
fn step_examples() {
    let spec = object("large rectangular");
    let s = preplacing_world(&spec, 0.0, 0.0, &SimConfig::default());
    let n = step(&spec, &s, &[0.0, 0.0, -0.01, 0.0, 0.0, 0.0], 0.5);
    assert_abs_diff_eq!(n.ee_pose.position.z, s.ee_pose.position.z - 0.005, epsilon = 1e-15);
    let n = step(&spec, &s, &[0.0, 0.0, 0.0, 0.0, 0.1, 0.0], 0.5);
    assert_abs_diff_eq!(n.ee_pose.rpy().1, 0.05, epsilon = 1e-12);
    assert_abs_diff_eq!(n.ee_pose.position, s.ee_pose.position, epsilon = 1e-15);
}

fn twist() -> impl Strategy<Value = [f64; 6]> {
    (prop::array::uniform3(-0.01..0.01f64), prop::array::uniform3(-0.5..0.5f64))
        .prop_map(|(v, w)| [v[0], v[1], v[2], w[0], w[1], w[2]])
}

proptest! {
    #[test]
    fn zero_twist_is_a_fixed_point(r in -10.0..10.0f64, p in -10.0..10.0f64, i in 0usize..18) {
        let spec = Catalog::default().objects[i].clone();
        prop_assume!(spec.liquid_shift == 0.0);
        let s = pressed(&spec, r, p, 0.0002);
        let n = step(&spec, &s, &[0.0; 6], 0.005);
        prop_assert_eq!(n, s);
    }

    #[test]
    fn object_stays_rigidly_attached(twists in prop::collection::vec(twist(), 1..40), i in 0usize..18) {
        let spec = Catalog::default().objects[i].clone();
        let mut s = preplacing_world(&spec, 4.0, -6.0, &SimConfig::default());
        for t in &twists {
            s = step(&spec, &s, t, 0.005);
        }
        let grasp = s.object_pose.transform_point(&spec.grasp_point());
        prop_assert!((grasp - s.ee_pose.position).norm() < 1e-12);
        prop_assert!((s.object_pose.orientation.matrix() - s.ee_pose.orientation.matrix()).norm() < 1e-12);
        prop_assert!(s.ee_pose.is_valid());
    }

    #[test]
    fn deeper_press_pushes_harder(d in 0.0001..0.002f64, extra in 0.0001..0.001f64, p in -8.0..8.0f64) {
        let spec = object("metal rectangular");
        let a = contact_state(&spec, &pressed(&spec, 0.0, p, d)).normal_force;
        let b = contact_state(&spec, &pressed(&spec, 0.0, p, d + extra)).normal_force;
        prop_assert!(b > a);
    }
}
