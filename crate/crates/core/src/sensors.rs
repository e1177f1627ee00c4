//! Synthetic sensor readings: a pair of dot-marker tactile sensors and a
//! wrist force/torque sensor with cable-tension bias.

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{Pose6, Wrench};
use crate::tactile::{DotField, DotGrid};

/// Linear, memoryless model of the dot displacement produced by the wrench
/// the grasped object exerts on the fingertips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GelSightModel {
    /// Tangential shear per unit fingertip shear force, mm/N.
    pub shear_compliance: f64,
    /// Mean field curl per unit pitch torque, 1/(N·m).
    pub rotational_compliance: f64,
    /// Common-mode vertical shear per unit press force, mm/N.
    pub press_compliance: f64,
    /// Dot localisation noise, mm per axis.
    pub jitter_std: f64,
    pub dot_dropout_rate: f64,
    pub dot_radius_variation: f64,
    /// Half the distance between the two fingertip pads, m.
    pub finger_half_spacing: f64,
    pub grid_cols: usize,
    pub grid_rows: usize,
    /// Dot pitch on the face, mm.
    pub grid_spacing: f64,
    /// Nominal dot radius, mm.
    pub dot_radius: f64,
}

impl Default for GelSightModel {
    fn default() -> Self {
        Self {
            shear_compliance: 0.05,
            rotational_compliance: 0.5,
            press_compliance: 0.02,
            jitter_std: 0.002,
            dot_dropout_rate: 0.0,
            dot_radius_variation: 0.0,
            finger_half_spacing: 0.02,
            grid_cols: 9,
            grid_rows: 7,
            grid_spacing: 2.0,
            dot_radius: 0.4,
        }
    }
}

impl GelSightModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("shear_compliance", self.shear_compliance),
            ("rotational_compliance", self.rotational_compliance),
            ("press_compliance", self.press_compliance),
            ("finger_half_spacing", self.finger_half_spacing),
            ("grid_spacing", self.grid_spacing),
            ("dot_radius", self.dot_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("gelsight.{name} must be > 0")));
            }
        }
        for (name, v) in
            [("dot_dropout_rate", self.dot_dropout_rate), ("dot_radius_variation", self.dot_radius_variation)]
        {
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::InvalidConfig(format!("gelsight.{name} must lie in [0, 0.5]")));
            }
        }
        if !(self.jitter_std >= 0.0) {
            return Err(Error::InvalidConfig("gelsight.jitter_std must be >= 0".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<DotGrid> {
        DotGrid::regular(self.grid_cols, self.grid_rows, self.grid_spacing, self.dot_radius)
    }

    /// Noiseless displacement of one dot at `(x, z)` mm on the given face.
    fn displacement(&self, face: Face, x: f64, z: f64, w: &Wrench, press: f64) -> Vector2<f64> {
        // Rigid rotation field with curl = -rotational_compliance * tau_y.
        let half = 0.5 * self.rotational_compliance * w.torque.y;
        let rot = Vector2::new(half * z, -half * x);
        // Roll torque splits into opposite vertical shear on the two pads.
        let shear = self.shear_compliance * w.torque.x / self.finger_half_spacing;
        let roll = match face {
            Face::Left => shear,
            Face::Right => -shear,
        };
        let lateral = 0.5 * self.shear_compliance * w.force.x;
        rot + Vector2::new(lateral, roll + self.press_compliance * press)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    /// GelSight1, on the `+y` side of the EE frame.
    Left,
    /// GelSight2, on the `-y` side.
    Right,
}

/// Per-trial sensor instance: grids plus static defects (dropped dots from
/// cracks/occlusion, per-dot size variation).
#[derive(Debug, Clone)]
pub struct GelSightPair {
    pub left: DotGrid,
    pub right: DotGrid,
    pub left_valid: Vec<bool>,
    pub right_valid: Vec<bool>,
    /// Snapshot grids displacements are measured against; the unloaded
    /// grids until one is taken.
    pub reference: Option<(DotGrid, DotGrid)>,
    left_scale: Vec<f64>,
    right_scale: Vec<f64>,
}

impl GelSightPair {
    pub fn new<R: Rng + ?Sized>(model: &GelSightModel, rng: &mut R) -> Result<Self> {
        let grid = model.grid()?;
        let n = grid.len();
        let defects = |rng: &mut R| -> (Vec<bool>, Vec<f64>) {
            let valid = (0..n).map(|_| rng.random::<f64>() >= model.dot_dropout_rate).collect();
            let scale = (0..n)
                .map(|_| 1.0 + model.dot_radius_variation * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            (valid, scale)
        };
        let (left_valid, left_scale) = defects(rng);
        let (right_valid, right_scale) = defects(rng);
        Ok(Self {
            left: grid.clone(),
            right: grid,
            left_valid,
            right_valid,
            reference: None,
            left_scale,
            right_scale,
        })
    }

    /// Measure later frames against a snapshot. The gel itself still
    /// deforms from its unloaded grid.
    pub fn with_reference(&self, left: DotGrid, right: DotGrid) -> Self {
        Self { reference: Some((left, right)), ..self.clone() }
    }
}

/// Dot fields on both faces for a fingertip wrench expressed at the force
/// application point in the tactile frame.
pub fn gelsight_respond<R: Rng + ?Sized>(
    model: &GelSightModel,
    sensor: &GelSightPair,
    fingertip_wrench: &Wrench,
    press_force_z: f64,
    rng: &mut R,
) -> (DotField, DotField) {
    let face = |face: Face, grid: &DotGrid, reference: Option<&DotGrid>, valid: &[bool], scale: &[f64], rng: &mut R| {
        let current = grid
            .rest
            .iter()
            .zip(scale)
            .map(|(p, s)| {
                let mut d = model.displacement(face, p.x, p.y, fingertip_wrench, press_force_z);
                if model.jitter_std > 0.0 {
                    let sd = model.jitter_std * s;
                    let jx: f64 = rng.sample(StandardNormal);
                    let jz: f64 = rng.sample(StandardNormal);
                    d += Vector2::new(jx * sd, jz * sd);
                }
                p + d
            })
            .collect();
        DotField { grid: reference.unwrap_or(grid).clone(), current, valid: valid.to_vec() }
    };
    let refs = sensor.reference.as_ref();
    let left = face(Face::Left, &sensor.left, refs.map(|r| &r.0), &sensor.left_valid, &sensor.left_scale, rng);
    let right = face(Face::Right, &sensor.right, refs.map(|r| &r.1), &sensor.right_valid, &sensor.right_scale, rng);
    (left, right)
}

/// Wrist force/torque sensor.
///
/// Reading pipeline: `true + noise + cable_bias`, first-order low-pass at
/// the control rate, quantised to the sensor resolution, minus the captured
/// offset. Cable bias is zero in the pose where the offset was captured and
/// changes smoothly with the EE pose after that:
/// `B ⊙ (tilt - tilt₀) + sign(tilt₀) ⊙ G ⊙ (z - z₀)` on the roll/pitch
/// torques. The cable is wound in the direction of the pre-placing tilt, so
/// the height term takes that sign; `G` is drawn once per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FTSensorModel {
    pub noise_std_force: f64,
    pub noise_std_torque: f64,
    /// `B`, N·m/rad for roll and pitch.
    pub cable_tilt_gain: [f64; 2],
    /// Mean of `G`, N·m per metre of EE height change.
    pub cable_height_gain: [f64; 2],
    /// Per-trial standard deviation of `G`.
    pub cable_height_gain_std: [f64; 2],
    pub lowpass_cutoff: f64,
    pub sample_rate: f64,
    pub resolution_fraction: f64,
    pub rated_force: f64,
    pub rated_torque: f64,
    /// Sensor origin in the EE frame, m.
    pub mount_offset: [f64; 3],
}

impl Default for FTSensorModel {
    fn default() -> Self {
        Self {
            noise_std_force: 0.2,
            noise_std_torque: 0.02,
            cable_tilt_gain: [0.28, 0.28],
            cable_height_gain: [-3.5, -3.5],
            cable_height_gain_std: [0.8, 0.8],
            lowpass_cutoff: 5.0,
            sample_rate: 200.0,
            resolution_fraction: 1.0 / 2000.0,
            rated_force: 500.0,
            rated_torque: 4.0,
            mount_offset: [0.0, 0.0, 0.0],
        }
    }
}

impl FTSensorModel {
    /// Noise and cable bias disabled; filter and quantisation kept.
    pub fn ideal() -> Self {
        Self {
            noise_std_force: 0.0,
            noise_std_torque: 0.0,
            cable_tilt_gain: [0.0; 2],
            cable_height_gain: [0.0; 2],
            cable_height_gain_std: [0.0; 2],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lowpass_cutoff", self.lowpass_cutoff),
            ("sample_rate", self.sample_rate),
            ("resolution_fraction", self.resolution_fraction),
            ("rated_force", self.rated_force),
            ("rated_torque", self.rated_torque),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("ft.{name} must be > 0")));
            }
        }
        if !(self.noise_std_force >= 0.0 && self.noise_std_torque >= 0.0) {
            return Err(Error::InvalidConfig("ft noise std must be >= 0".into()));
        }
        if self.cable_height_gain_std.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidConfig("ft.cable_height_gain_std must be >= 0".into()));
        }
        Ok(())
    }

    pub fn force_step(&self) -> f64 {
        self.resolution_fraction * self.rated_force
    }

    pub fn torque_step(&self) -> f64 {
        self.resolution_fraction * self.rated_torque
    }

    fn smoothing(&self) -> f64 {
        let dt = 1.0 / self.sample_rate;
        dt / (dt + 1.0 / (2.0 * PI * self.lowpass_cutoff))
    }

    /// Cable torque `(τx, τy)` at `pose` for an offset captured at
    /// `capture` and a trial's height gain `g`.
    pub fn cable_bias(&self, pose: &Pose6, capture: &Pose6, g: [f64; 2]) -> [f64; 2] {
        let (roll, pitch, _) = pose.rpy();
        let (roll0, pitch0, _) = capture.rpy();
        let dz = pose.position.z - capture.position.z;
        let sign = |v: f64| if v == 0.0 { 0.0 } else { v.signum() };
        [
            self.cable_tilt_gain[0] * (roll - roll0) + sign(roll0) * g[0] * dz,
            self.cable_tilt_gain[1] * (pitch - pitch0) + sign(pitch0) * g[1] * dz,
        ]
    }
}

/// Filter memory, captured offset and the trial's cable state.
#[derive(Debug, Clone, PartialEq)]
pub struct FtState {
    filtered: Option<[f64; 6]>,
    offset: Option<[f64; 6]>,
    height_gain: [f64; 2],
    last_reading: [f64; 6],
    last_pose: Option<Pose6>,
    capture_pose: Option<Pose6>,
}

impl FtState {
    pub fn new<R: Rng + ?Sized>(model: &FTSensorModel, rng: &mut R) -> Self {
        let height_gain = [0, 1].map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            model.cable_height_gain[i] + model.cable_height_gain_std[i] * z
        });
        Self {
            filtered: None,
            offset: None,
            height_gain,
            last_reading: [0.0; 6],
            last_pose: None,
            capture_pose: None,
        }
    }

    pub fn height_gain(&self) -> [f64; 2] {
        self.height_gain
    }

    pub fn offset(&self) -> Option<Wrench> {
        self.offset.map(Wrench::from_array)
    }

    /// Latest quantised reading before offset removal.
    pub fn last_reading(&self) -> Wrench {
        Wrench::from_array(self.last_reading)
    }

    /// Forget the offset and the filter memory.
    pub fn reset(&mut self) {
        self.filtered = None;
        self.offset = None;
        self.capture_pose = None;
    }
}

fn quantize(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// One 200 Hz reading of the wrist sensor, in the sensor frame.
pub fn ft_read<R: Rng + ?Sized>(
    model: &FTSensorModel,
    true_wrench_at_sensor: &Wrench,
    ee_pose: &Pose6,
    rng: &mut R,
    state: &mut FtState,
) -> Wrench {
    let mut raw = true_wrench_at_sensor.to_array();
    let force_noise = Normal::new(0.0, model.noise_std_force).expect("validated std");
    let torque_noise = Normal::new(0.0, model.noise_std_torque).expect("validated std");
    for v in &mut raw[..3] {
        *v += force_noise.sample(rng);
    }
    for v in &mut raw[3..] {
        *v += torque_noise.sample(rng);
    }
    if let Some(capture) = &state.capture_pose {
        let bias = model.cable_bias(ee_pose, capture, state.height_gain);
        raw[3] += bias[0];
        raw[4] += bias[1];
    }
    state.last_pose = Some(*ee_pose);

    let filtered = match state.filtered {
        None => raw,
        Some(prev) => {
            let a = model.smoothing();
            std::array::from_fn(|i| a * raw[i] + (1.0 - a) * prev[i])
        }
    };
    state.filtered = Some(filtered);

    let (fs, ts) = (model.force_step(), model.torque_step());
    let reading: [f64; 6] =
        std::array::from_fn(|i| quantize(filtered[i], if i < 3 { fs } else { ts }));
    state.last_reading = reading;
    let offset = state.offset.unwrap_or([0.0; 6]);
    Wrench::from_array(std::array::from_fn(|i| reading[i] - offset[i]))
}

/// Record `current_reading` as the offset subtracted from later reads. The
/// pose of the latest read becomes the cable's reference pose.
pub fn ft_capture_offset(
    _model: &FTSensorModel,
    state: &mut FtState,
    current_reading: &Wrench,
) -> Result<()> {
    if state.offset.is_some() {
        return Err(Error::DoubleCapture);
    }
    state.offset = Some(current_reading.to_array());
    state.capture_pose = state.last_pose;
    Ok(())
}

/// Position of the sensor origin in the EE frame.
pub fn mount_offset(model: &FTSensorModel) -> Vector3<f64> {
    Vector3::from(model.mount_offset)
}
