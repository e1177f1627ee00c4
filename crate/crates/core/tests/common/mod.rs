#![allow(dead_code)]

use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use tactile_placing::{FrameTransform, Wrench};

pub fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

pub fn rotation() -> impl Strategy<Value = Rotation3<f64>> {
    vec3(std::f64::consts::PI).prop_map(Rotation3::new)
}

pub fn transform() -> impl Strategy<Value = FrameTransform> {
    (rotation(), vec3(0.5)).prop_map(|(r, d)| FrameTransform::from_parts(r, d))
}

pub fn wrench() -> impl Strategy<Value = Wrench> {
    (vec3(20.0), vec3(2.0)).prop_map(|(f, t)| Wrench::new(f, t))
}

pub fn max_abs(a: [f64; 6], b: [f64; 6]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
