//! Rigid frames and wrench algebra.
//!
//! Three frames appear throughout the crate:
//!
//! * the **robot** frame, fixed at the arm base, `z` pointing up;
//! * the **end-effector (EE)** frame, with its origin at the midpoint between
//!   the two fingertips (the *force application point*);
//! * the **tactile** frame, which is the robot frame yawed about `z` until its
//!   `x` axis is parallel to the EE `x` axis.
//!
//! Orientation is always carried as a rotation matrix. Roll/pitch/yaw only
//! appear at API boundaries and use the Z-Y-X convention
//! `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
//!
//! Torque sign convention: a positive component is a right-handed rotation
//! about that axis. For pitch this is clockwise when the `x`-`z` plane is
//! drawn with `x` to the right and `z` up, so a force application point to
//! the right of the vertical line through the contact gives positive pitch
//! torque.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating rotation matrices.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Sign relating the mean curl of a dot field to the pitch pseudo-torque.
///
/// A clockwise dot field (negative curl in right-handed face coordinates)
/// corresponds to a positive pitch torque.
pub const CURL_TORQUE_SIGN: f64 = -1.0;

/// Sign relating `Diff` (GelSight1 minus GelSight2) to the roll pseudo-torque.
pub const DIFF_TORQUE_SIGN: f64 = 1.0;

fn check_rotation(m: &Matrix3<f64>) -> Result<Rotation3<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("rotation has non-finite entries".into()));
    }
    let orth = (m.transpose() * m - Matrix3::identity()).abs().max();
    let det = m.determinant();
    if orth > ROTATION_TOLERANCE || (det - 1.0).abs() > ROTATION_TOLERANCE {
        return Err(Error::InvalidConfig(format!(
            "not a proper rotation (orthonormality error {orth:.3e}, det {det})"
        )));
    }
    Ok(Rotation3::from_matrix_unchecked(*m))
}

/// Pose of a frame in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose6 {
    pub position: Vector3<f64>,
    pub orientation: Rotation3<f64>,
}

impl Pose6 {
    pub fn new(position: Vector3<f64>, orientation: Matrix3<f64>) -> Result<Self> {
        Ok(Self { position, orientation: check_rotation(&orientation)? })
    }

    pub fn identity() -> Self {
        Self { position: Vector3::zeros(), orientation: Rotation3::identity() }
    }

    pub fn from_rotation(position: Vector3<f64>, orientation: Rotation3<f64>) -> Self {
        Self { position, orientation }
    }

    /// Pose from a position and Z-Y-X roll/pitch/yaw in radians.
    pub fn from_rpy(position: Vector3<f64>, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { position, orientation: rotation_from_rpy(roll, pitch, yaw) }
    }

    /// Z-Y-X `(roll, pitch, yaw)` of the orientation, radians.
    pub fn rpy(&self) -> (f64, f64, f64) {
        rpy_from_rotation(&self.orientation)
    }

    /// The transform mapping coordinates in this frame to robot coordinates.
    pub fn as_transform(&self) -> FrameTransform {
        FrameTransform { rotation: self.orientation, displacement: self.position }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * p + self.position
    }

    pub fn is_valid(&self) -> bool {
        check_rotation(self.orientation.matrix()).is_ok()
            && self.position.iter().all(|v| v.is_finite())
    }
}

pub fn rotation_from_rpy(roll: f64, pitch: f64, yaw: f64) -> Rotation3<f64> {
    Rotation3::from_euler_angles(roll, pitch, yaw)
}

pub fn rpy_from_rotation(r: &Rotation3<f64>) -> (f64, f64, f64) {
    r.euler_angles()
}

/// Force (N) and torque (N·m) acting at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Default for Wrench {
    fn default() -> Self {
        Self::zero()
    }
}

impl Wrench {
    /// Panics if any component is not finite.
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        assert!(
            force.iter().chain(torque.iter()).all(|v| v.is_finite()),
            "wrench components must be finite"
        );
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self { force: Vector3::zeros(), torque: Vector3::zeros() }
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))
    }

    /// `[Fx, Fy, Fz, τx, τy, τz]`
    pub fn to_array(&self) -> [f64; 6] {
        [self.force.x, self.force.y, self.force.z, self.torque.x, self.torque.y, self.torque.z]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

impl Sub for Wrench {
    type Output = Wrench;
    fn sub(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force - rhs.force, self.torque - rhs.torque)
    }
}

impl Neg for Wrench {
    type Output = Wrench;
    fn neg(self) -> Wrench {
        Wrench::new(-self.force, -self.torque)
    }
}

impl Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, s: f64) -> Wrench {
        Wrench::new(self.force * s, self.torque * s)
    }
}

/// Rigid transform `A <- B`: `rotation` is the orientation of frame B
/// expressed in A and `displacement` is the position of B's origin in A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTransform {
    pub rotation: Rotation3<f64>,
    pub displacement: Vector3<f64>,
}

impl FrameTransform {
    pub fn new(rotation: Matrix3<f64>, displacement: Vector3<f64>) -> Result<Self> {
        Ok(Self { rotation: check_rotation(&rotation)?, displacement })
    }

    pub fn identity() -> Self {
        Self { rotation: Rotation3::identity(), displacement: Vector3::zeros() }
    }

    pub fn from_parts(rotation: Rotation3<f64>, displacement: Vector3<f64>) -> Self {
        Self { rotation, displacement }
    }

    pub fn inverse(&self) -> FrameTransform {
        let rt = self.rotation.inverse();
        FrameTransform { rotation: rt, displacement: -(rt * self.displacement) }
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.displacement
    }
}

/// Moves a wrench expressed in frame B (at B's origin) to frame A:
/// `F = R·F'`, `τ = R·τ' + d × (R·F')`.
pub fn transform_wrench(t: &FrameTransform, w: &Wrench) -> Wrench {
    let force = t.rotation * w.force;
    let torque = t.rotation * w.torque + t.displacement.cross(&force);
    Wrench::new(force, torque)
}

/// `compose(t1, t2)` applies `t2` first, then `t1`.
pub fn compose(t1: &FrameTransform, t2: &FrameTransform) -> FrameTransform {
    FrameTransform {
        rotation: t1.rotation * t2.rotation,
        displacement: t1.rotation * t2.displacement + t1.displacement,
    }
}

pub fn inverse(t: &FrameTransform) -> FrameTransform {
    t.inverse()
}

/// Re-expresses a tactile-frame `(roll, pitch)` pseudo-torque in axes yawed
/// by `yaw` about `z`.
pub fn tactile_to_ee(torque_xy: Vector2<f64>, yaw: f64) -> Vector2<f64> {
    let (s, c) = yaw.sin_cos();
    Vector2::new(c * torque_xy.x - s * torque_xy.y, s * torque_xy.x + c * torque_xy.y)
}
