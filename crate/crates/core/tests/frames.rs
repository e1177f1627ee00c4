mod common;

use approx::assert_abs_diff_eq;
use nalgebra::{Matrix4, Matrix6, Rotation3, Vector2, Vector3, Vector6};
use proptest::prelude::*;
use tactile_placing::frames::{compose, inverse, rotation_from_rpy, rpy_from_rotation, tactile_to_ee, transform_wrench};
use tactile_placing::{FrameTransform, Wrench};

use common::{max_abs, rotation, transform, vec3, wrench};

/// Wrench adjoint `[[R, 0], [d^ R, R]]` assembled entry by entry.
fn adjoint(t: &FrameTransform) -> Matrix6<f64> {
    let r = t.rotation.matrix();
    let d = t.displacement;
    let hat = nalgebra::Matrix3::new(0.0, -d.z, d.y, d.z, 0.0, -d.x, -d.y, d.x, 0.0);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(hat * r));
    m
}

fn homogeneous(t: &FrameTransform) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(t.rotation.matrix());
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t.displacement);
    m
}

#[test]
fn adjoint_oracle_on_quarter_turn_example() {
    let t = FrameTransform::from_parts(
        Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2),
        Vector3::new(0.05, 0.02, -0.1),
    );
    let w = Wrench::from_array([1.0, 0.0, 0.0, 0.0, 0.3, 0.0]);
    let got = transform_wrench(&t, &w).to_array();
    let want = adjoint(&t) * Vector6::from_row_slice(&w.to_array());
    assert!(max_abs(got, want.into()) < 1e-12);
}

#[test]
fn hand_cross_product_example() {
    let t = FrameTransform::from_parts(Rotation3::identity(), Vector3::new(0.1, 0.0, 0.0));
    let w = transform_wrench(&t, &Wrench::from_array([0.0, 0.0, 5.0, 0.0, 0.0, 0.0]));
    assert_abs_diff_eq!(w.torque.y, -0.5, epsilon = 1e-15);
    assert_eq!(w.force, Vector3::new(0.0, 0.0, 5.0));
}

#[test]
fn tactile_to_ee_matches_rotation_matrix() {
    let yaw = std::f64::consts::FRAC_PI_6;
    let v = Vector2::new(0.4, -0.2);
    let r = nalgebra::Matrix2::new(yaw.cos(), -yaw.sin(), yaw.sin(), yaw.cos());
    let got = tactile_to_ee(v, yaw);
    assert_abs_diff_eq!(got, r * v, epsilon = 1e-15);
    assert_abs_diff_eq!(tactile_to_ee(Vector2::new(0.4, 0.0), 0.0), Vector2::new(0.4, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_adjoint_oracle(t in transform(), w in wrench()) {
        let got = transform_wrench(&t, &w).to_array();
        let want = adjoint(&t) * Vector6::from_row_slice(&w.to_array());
        prop_assert!(max_abs(got, want.into()) < 1e-12);
    }

    #[test]
    fn linear_in_the_wrench(t in transform(), w1 in wrench(), w2 in wrench(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let lhs = transform_wrench(&t, &(w1 * a + w2 * b)).to_array();
        let rhs = (transform_wrench(&t, &w1) * a + transform_wrench(&t, &w2) * b).to_array();
        prop_assert!(max_abs(lhs, rhs) < 1e-12);
    }

    #[test]
    fn identity_is_exact(w in wrench()) {
        prop_assert_eq!(transform_wrench(&FrameTransform::identity(), &w), w);
    }

    #[test]
    fn inverse_round_trip(t in transform(), w in wrench()) {
        let back = transform_wrench(&t.inverse(), &transform_wrench(&t, &w));
        prop_assert!(max_abs(back.to_array(), w.to_array()) < 1e-10);
    }

    #[test]
    fn displacement_along_force_adds_no_torque(r in rotation(), f in vec3(20.0), s in -0.5..0.5f64) {
        let d = (r * f) * s;
        let t = FrameTransform::from_parts(r, d);
        let w = transform_wrench(&t, &Wrench::new(f, Vector3::zeros()));
        prop_assert!(w.torque.norm() < 1e-12 * (1.0 + f.norm()));
    }

    #[test]
    fn compose_matches_homogeneous_product(a in transform(), b in transform()) {
        let got = homogeneous(&compose(&a, &b));
        let want = homogeneous(&a) * homogeneous(&b);
        prop_assert!((got - want).abs().max() < 1e-12);
        let id = homogeneous(&compose(&a, &inverse(&a)));
        prop_assert!((id - Matrix4::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn rpy_round_trip(r in -3.0..3.0f64, p in -1.5..1.5f64, y in -3.0..3.0f64) {
        let (r2, p2, y2) = rpy_from_rotation(&rotation_from_rpy(r, p, y));
        prop_assert!((r - r2).abs() < 1e-9 && (p - p2).abs() < 1e-9 && (y - y2).abs() < 1e-9);
    }

    #[test]
    fn rpy_matches_matrix_decomposition(rot in rotation()) {
        // Z-Y-X: R[2][0] = -sin(pitch), R[2][1] = sin(roll) cos(pitch), R[1][0] = sin(yaw) cos(pitch).
        let m = rot.matrix();
        let (r, p, y) = rpy_from_rotation(&rot);
        prop_assume!(p.cos() > 1e-3);
        prop_assert!((m[(2, 0)] + p.sin()).abs() < 1e-9);
        prop_assert!((m[(2, 1)] - r.sin() * p.cos()).abs() < 1e-9);
        prop_assert!((m[(2, 2)] - r.cos() * p.cos()).abs() < 1e-9);
        prop_assert!((m[(1, 0)] - y.sin() * p.cos()).abs() < 1e-9);
        prop_assert!((m[(0, 0)] - y.cos() * p.cos()).abs() < 1e-9);
    }
}
