//! Placing loop: descend until the wrist sensor feels the table, then run
//! the admittance law on either the wrist torques or the tactile
//! pseudo-torques until they settle.

use std::io::Write;

use nalgebra::{Rotation3, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{
    tactile_to_ee, transform_wrench, FrameTransform, Wrench, CURL_TORQUE_SIGN, DIFF_TORQUE_SIGN,
};
use crate::sensors::{
    ft_capture_offset, ft_read, gelsight_respond, mount_offset, FTSensorModel, FtState, GelSightModel,
    GelSightPair,
};
use crate::tactile::{features_with, snapshot_reference, CurlEstimator, DotField, TactileFeatures};
use crate::world::{external_wrench, placement_error, step, topple_check, RigidObjectSpec, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    Tactile,
    #[serde(alias = "ft")]
    FtBaseline,
}

impl ControlMode {
    pub fn label(self) -> &'static str {
        match self {
            ControlMode::Tactile => "tactile",
            ControlMode::FtBaseline => "ft",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tactile" => Some(ControlMode::Tactile),
            "ft" | "ft_baseline" => Some(ControlMode::FtBaseline),
            _ => None,
        }
    }
}

impl std::fmt::Display for ControlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Diagonal admittance gain on `[Fx, Fy, Fz, τx, τy, τz]` errors,
    /// (m/s)/N and (rad/s)/(N·m).
    pub gain: [f64; 6],
    pub target_force_z: f64,
    pub descent_speed: f64,
    pub contact_trigger: f64,
    /// Pitch pseudo-torque per unit curl, N·m.
    pub curl_scale: f64,
    /// Roll pseudo-torque per mm of `Diff`, N·m/mm.
    pub diff_scale: f64,
    pub control_rate: f64,
    pub tactile_rate: f64,
    pub settle_window: usize,
    pub settle_epsilon: f64,
    /// Time allowed after contact, s.
    pub timeout: f64,
    /// Height of the lowest support point above the table when descent
    /// starts, m.
    pub approach_clearance: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gain: [0.0, 0.0, 0.002, 1.0, 1.0, 0.0],
            target_force_z: 5.0,
            descent_speed: 0.005,
            contact_trigger: 1.0,
            curl_scale: 2.0,
            diff_scale: 0.2,
            control_rate: 200.0,
            tactile_rate: 10.0,
            settle_window: 100,
            settle_epsilon: 0.001,
            timeout: 30.0,
            approach_clearance: 0.01,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("target_force_z", self.target_force_z),
            ("descent_speed", self.descent_speed),
            ("contact_trigger", self.contact_trigger),
            ("curl_scale", self.curl_scale),
            ("diff_scale", self.diff_scale),
            ("control_rate", self.control_rate),
            ("tactile_rate", self.tactile_rate),
            ("settle_epsilon", self.settle_epsilon),
            ("timeout", self.timeout),
            ("approach_clearance", self.approach_clearance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("controller.{name} must be > 0")));
            }
        }
        if self.settle_window == 0 {
            return Err(Error::InvalidConfig("controller.settle_window must be > 0".into()));
        }
        if self.gain.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidConfig("controller.gain entries must be >= 0".into()));
        }
        if !(self.gain[2] > 0.0 && self.gain[3] > 0.0 && self.gain[4] > 0.0) {
            return Err(Error::InvalidConfig("controller z, roll and pitch gains must be > 0".into()));
        }
        if self.tactile_rate > self.control_rate {
            return Err(Error::InvalidConfig("tactile_rate cannot exceed control_rate".into()));
        }
        Ok(())
    }

    pub fn target(&self) -> Wrench {
        Wrench::from_array([0.0, 0.0, self.target_force_z, 0.0, 0.0, 0.0])
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.control_rate
    }

    /// Control steps per tactile frame.
    pub fn tactile_period(&self) -> usize {
        (self.control_rate / self.tactile_rate).round().max(1.0) as usize
    }
}

/// `k ⊙ (w_current - w_target)` as an EE twist `[v; ω]`.
pub fn admittance_step(w_current: &Wrench, cfg: &ControllerConfig) -> [f64; 6] {
    let err = (*w_current - cfg.target()).to_array();
    std::array::from_fn(|i| cfg.gain[i] * err[i])
}

/// Wrench fed to the admittance law in tactile mode.
pub fn tactile_pseudo_wrench(
    features: &TactileFeatures,
    fz_measured: f64,
    cfg: &ControllerConfig,
    yaw: f64,
) -> Wrench {
    let tactile = Vector2::new(
        DIFF_TORQUE_SIGN * cfg.diff_scale * features.diff_z,
        CURL_TORQUE_SIGN * cfg.curl_scale * features.curl_mean,
    );
    let t = tactile_to_ee(tactile, yaw);
    Wrench::new(Vector3::new(0.0, 0.0, fz_measured), Vector3::new(t.x, t.y, 0.0))
}

/// True iff the last `settle_window` entries are all below `settle_epsilon`.
pub fn settle_check(history: &[f64], cfg: &ControllerConfig) -> bool {
    history.len() >= cfg.settle_window
        && history[history.len() - cfg.settle_window..].iter().all(|v| *v < cfg.settle_epsilon)
}

/// Wrist sensor frame relative to robot-axes at the EE origin.
fn sensor_transform(world: &WorldState, ft: &FTSensorModel) -> FrameTransform {
    let r = world.ee_pose.orientation;
    FrameTransform::from_parts(r, r * mount_offset(ft))
}

fn yaw_rotation(world: &WorldState) -> (f64, Rotation3<f64>) {
    let yaw = world.ee_pose.rpy().2;
    (yaw, Rotation3::from_euler_angles(0.0, 0.0, yaw))
}

/// Sensor hardware and per-trial calibration state.
#[derive(Debug, Clone)]
pub struct Sensors {
    pub gelsight: GelSightModel,
    pub ft: FTSensorModel,
    pub pair: GelSightPair,
    pub ft_state: FtState,
    estimators: Option<(CurlEstimator, CurlEstimator)>,
}

impl Sensors {
    pub fn new<R: Rng + ?Sized>(gelsight: GelSightModel, ft: FTSensorModel, rng: &mut R) -> Result<Self> {
        let pair = GelSightPair::new(&gelsight, rng)?;
        let ft_state = FtState::new(&ft, rng);
        Ok(Self { gelsight, ft, pair, ft_state, estimators: None })
    }

    /// Snapshot the tactile reference and capture the wrist offset in the
    /// current (pre-placing) pose.
    pub fn calibrate<R: Rng + ?Sized>(
        &mut self,
        spec: &RigidObjectSpec,
        world: &WorldState,
        rng: &mut R,
    ) -> Result<()> {
        let (left, right) = self.tactile_fields(spec, world, rng);
        let left_ref = snapshot_reference(&left);
        let right_ref = snapshot_reference(&right);
        let est_l = CurlEstimator::new(&left_ref, &self.pair.left_valid)?;
        let est_r = CurlEstimator::new(&right_ref, &self.pair.right_valid)?;
        self.pair = self.pair.with_reference(left_ref, right_ref);
        self.estimators = Some((est_l, est_r));
        self.ft_state.reset();
        let settle = (0.1 * self.ft.sample_rate).ceil() as usize;
        for _ in 0..settle.max(1) {
            self.read_ft(spec, world, rng);
        }
        let reading = self.ft_state.last_reading();
        ft_capture_offset(&self.ft, &mut self.ft_state, &reading)
    }

    pub fn is_calibrated(&self) -> bool {
        self.estimators.is_some() && self.ft_state.offset().is_some()
    }

    /// Dot fields against the current reference (the physical rest grid
    /// before calibration).
    fn tactile_fields<R: Rng + ?Sized>(
        &self,
        spec: &RigidObjectSpec,
        world: &WorldState,
        rng: &mut R,
    ) -> (DotField, DotField) {
        let (_, yaw_rot) = yaw_rotation(world);
        let w = external_wrench(spec, world);
        let in_tactile = Wrench::new(yaw_rot.inverse() * w.force, yaw_rot.inverse() * w.torque);
        gelsight_respond(&self.gelsight, &self.pair, &in_tactile, world.press_force_z, rng)
    }

    pub fn read_tactile<R: Rng + ?Sized>(
        &self,
        spec: &RigidObjectSpec,
        world: &WorldState,
        rng: &mut R,
    ) -> Result<TactileFeatures> {
        let (est_l, est_r) = self
            .estimators
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("tactile reference not captured".into()))?;
        let (left, right) = self.tactile_fields(spec, world, rng);
        features_with(&left, &right, est_l, est_r)
    }

    /// Wrist reading moved to the EE origin, robot axes.
    pub fn read_ft<R: Rng + ?Sized>(&mut self, spec: &RigidObjectSpec, world: &WorldState, rng: &mut R) -> Wrench {
        let t = sensor_transform(world, &self.ft);
        let truth = transform_wrench(&t.inverse(), &external_wrench(spec, world));
        let measured = ft_read(&self.ft, &truth, &world.ee_pose, rng, &mut self.ft_state);
        transform_wrench(&t, &measured)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TelemetryRow {
    pub t: f64,
    pub mode: ControlMode,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub curl: f64,
    pub diff: f64,
    pub wrench: [f64; 6],
    pub twist: [f64; 6],
}

pub fn write_telemetry<W: Write>(rows: &[TelemetryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t", "mode", "roll_deg", "pitch_deg", "curl", "diff", "fx", "fy", "fz", "tx", "ty", "tz", "vx", "vy",
        "vz", "wx", "wy", "wz",
    ])?;
    for r in rows {
        let mut rec = vec![r.t.to_string(), r.mode.label().to_string()];
        rec.extend([r.roll_deg, r.pitch_deg, r.curl, r.diff].iter().map(|v| v.to_string()));
        rec.extend(r.wrench.iter().chain(&r.twist).map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Settled,
    Timeout,
    Toppled,
    /// The wrist sensor never reported contact.
    NoContact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub toppled: bool,
    pub termination: Termination,
    /// Control steps after the contact trigger.
    pub steps: usize,
    pub contact_time: Option<f64>,
    pub telemetry: Vec<TelemetryRow>,
}

impl TrialOutcome {
    pub fn success(&self, threshold_deg: f64) -> bool {
        !self.toppled && self.roll_deg.abs() < threshold_deg && self.pitch_deg.abs() < threshold_deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub telemetry: bool,
}

/// Runs one placement from a calibrated pre-placing pose.
pub fn run_placement<R: Rng + ?Sized>(
    mode: ControlMode,
    spec: &RigidObjectSpec,
    world: WorldState,
    sensors: &mut Sensors,
    cfg: &ControllerConfig,
    rng: &mut R,
    opts: RunOptions,
) -> Result<TrialOutcome> {
    if !sensors.is_calibrated() {
        sensors.calibrate(spec, &world, rng)?;
    }
    let dt = cfg.dt();
    let mut world = world;
    let mut t = 0.0;
    let mut telemetry = Vec::new();
    let outcome = |world: &WorldState, toppled, termination, steps, contact_time, telemetry| {
        let (roll_deg, pitch_deg) = placement_error(spec, world);
        TrialOutcome { roll_deg, pitch_deg, toppled, termination, steps, contact_time, telemetry }
    };

    // Descent.
    let descent_limit = cfg.approach_clearance / cfg.descent_speed * 3.0 + cfg.timeout;
    loop {
        let w = sensors.read_ft(spec, &world, rng);
        if w.force.z > cfg.contact_trigger {
            break;
        }
        if t > descent_limit {
            return Ok(outcome(&world, false, Termination::NoContact, 0, None, telemetry));
        }
        let twist = [0.0, 0.0, -cfg.descent_speed, 0.0, 0.0, 0.0];
        if opts.telemetry {
            let (roll_deg, pitch_deg) = placement_error(spec, &world);
            telemetry.push(TelemetryRow {
                t,
                mode,
                roll_deg,
                pitch_deg,
                curl: 0.0,
                diff: 0.0,
                wrench: w.to_array(),
                twist,
            });
        }
        world = step(spec, &world, &twist, dt);
        t += dt;
    }
    let contact_time = Some(t);

    // Admittance loop.
    let period = cfg.tactile_period();
    let max_steps = (cfg.timeout / dt).round() as usize;
    let mut history = Vec::with_capacity(max_steps);
    let mut features = TactileFeatures::default();
    for k in 0..max_steps {
        let ft = sensors.read_ft(spec, &world, rng);
        let current = match mode {
            ControlMode::FtBaseline => ft,
            ControlMode::Tactile => {
                if k % period == 0 {
                    features = sensors.read_tactile(spec, &world, rng)?;
                }
                let (yaw, _) = yaw_rotation(&world);
                tactile_pseudo_wrench(&features, ft.force.z, cfg, yaw)
            }
        };
        history.push(current.torque.x.abs().max(current.torque.y.abs()));
        let twist = admittance_step(&current, cfg);
        if opts.telemetry {
            let (roll_deg, pitch_deg) = placement_error(spec, &world);
            telemetry.push(TelemetryRow {
                t,
                mode,
                roll_deg,
                pitch_deg,
                curl: features.curl_mean,
                diff: features.diff_z,
                wrench: current.to_array(),
                twist,
            });
        }
        if settle_check(&history, cfg) {
            return Ok(outcome(&world, false, Termination::Settled, k + 1, contact_time, telemetry));
        }
        world = step(spec, &world, &twist, dt);
        t += dt;
        if topple_check(spec, &world) {
            return Ok(outcome(&world, true, Termination::Toppled, k + 1, contact_time, telemetry));
        }
    }
    Ok(outcome(&world, false, Termination::Timeout, max_steps, contact_time, telemetry))
}
