//! Moving a wrench between frames, and rotating tactile pseudo-torques
//! into EE axes.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Vector2, Vector3};
use tactile_placing::frames::{compose, rotation_from_rpy, tactile_to_ee, transform_wrench};
use tactile_placing::{FrameTransform, Wrench};

fn main() {
    // A sensor 10 cm above the fingertips, rolled by 20 degrees.
    let sensor_in_ee = FrameTransform::from_parts(rotation_from_rpy(20f64.to_radians(), 0.0, 0.0), Vector3::new(0.0, 0.0, 0.1));

    // 5 N pushing up at the sensor origin, no torque.
    let at_sensor = Wrench::new(Vector3::new(0.0, 0.0, 5.0), Vector3::zeros());
    let at_ee = transform_wrench(&sensor_in_ee, &at_sensor);
    println!("at sensor: {:?}", at_sensor.to_array());
    println!("at EE:     {:?}", at_ee.to_array().map(|v| (v * 1e6).round() / 1e6));

    // Round trip through the inverse.
    let back = transform_wrench(&sensor_in_ee.inverse(), &at_ee);
    let err = (back - at_sensor).to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("round trip max error: {err:.1e}");

    // Chained transforms compose.
    let a = FrameTransform::from_parts(rotation_from_rpy(0.0, 0.3, 0.1), Vector3::new(0.02, 0.0, 0.0));
    let chained = transform_wrench(&a, &transform_wrench(&sensor_in_ee, &at_sensor));
    let direct = transform_wrench(&compose(&a, &sensor_in_ee), &at_sensor);
    let err = (chained - direct).to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("compose vs chain max error: {err:.1e}");

    // A pure tactile pitch torque read with the gripper yawed by 90 degrees
    // acts about the EE's -x axis.
    let t = tactile_to_ee(Vector2::new(0.0, 0.05), FRAC_PI_2);
    println!("tactile (0, 0.05) at yaw 90 deg -> EE ({:+.3}, {:+.3})", t.x, t.y);
}
