//! Trial protocol, batch statistics and the two benchmark tables.

use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, Catalog};
use crate::config::SimConfig;
use crate::controller::{run_placement, ControlMode, RunOptions, Sensors, TrialOutcome};
use crate::error::{Error, Result};
use crate::frames::Pose6;
use crate::world::{RigidObjectSpec, WorldState};

pub const TABLE1_GRASP_HEIGHTS: [f64; 2] = [0.010, 0.025];
pub const MODES: [ControlMode; 2] = [ControlMode::Tactile, ControlMode::FtBaseline];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltKind {
    Fixed,
    GaussianSigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRule {
    BothPositive,
    UniformRandomSign,
    /// Multiply each axis by the given sign (`1.0` or `-1.0`).
    FixedSign { roll: f64, pitch: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltPolicy {
    pub kind: TiltKind,
    pub roll_mean_deg: f64,
    pub pitch_mean_deg: f64,
    /// deg²
    pub variance: f64,
    pub sign_rule: SignRule,
}

impl TiltPolicy {
    pub fn fixed(roll_deg: f64, pitch_deg: f64) -> Self {
        Self {
            kind: TiltKind::Fixed,
            roll_mean_deg: roll_deg,
            pitch_mean_deg: pitch_deg,
            variance: 0.0,
            sign_rule: SignRule::BothPositive,
        }
    }

    pub fn gaussian(roll_mean_deg: f64, pitch_mean_deg: f64, variance: f64, sign_rule: SignRule) -> Self {
        Self { kind: TiltKind::GaussianSigned, roll_mean_deg, pitch_mean_deg, variance, sign_rule }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0) || !self.roll_mean_deg.is_finite() || !self.pitch_mean_deg.is_finite() {
            return Err(Error::InvalidConfig("tilt variance must be >= 0 and means finite".into()));
        }
        if let SignRule::FixedSign { roll, pitch } = self.sign_rule {
            if roll.abs() != 1.0 || pitch.abs() != 1.0 {
                return Err(Error::InvalidConfig("fixed signs must be +1 or -1".into()));
            }
        }
        Ok(())
    }
}

/// Pre-placing tilt `(roll_deg, pitch_deg)`.
pub fn sample_tilt<R: Rng + ?Sized>(policy: &TiltPolicy, rng: &mut R) -> (f64, f64) {
    if policy.kind == TiltKind::Fixed {
        return (policy.roll_mean_deg, policy.pitch_mean_deg);
    }
    let sd = policy.variance.sqrt();
    let mut axis = |mean: f64, fixed: f64| {
        let v = Normal::new(mean, sd).expect("validated variance").sample(rng);
        match policy.sign_rule {
            SignRule::BothPositive => v,
            SignRule::UniformRandomSign => {
                if rng.random::<bool>() {
                    v
                } else {
                    -v
                }
            }
            SignRule::FixedSign { .. } => fixed * v,
        }
    };
    let (rs, ps) = match policy.sign_rule {
        SignRule::FixedSign { roll, pitch } => (roll, pitch),
        _ => (1.0, 1.0),
    };
    let roll = axis(policy.roll_mean_deg, rs);
    let pitch = axis(policy.pitch_mean_deg, ps);
    (roll, pitch)
}

/// Tilt protocol for the catalog sweep, including the per-object
/// exceptions.
pub fn table2_tilt_policy(object: &str) -> TiltPolicy {
    match object {
        catalog::CONVERSION_CONNECTOR => TiltPolicy::gaussian(10.0, 3.0, 1.0, SignRule::UniformRandomSign),
        catalog::JOINT => TiltPolicy::gaussian(10.0, 5.0, 1.0, SignRule::FixedSign { roll: 1.0, pitch: -1.0 }),
        catalog::HAND_CREAM_TUBE => TiltPolicy::gaussian(5.0, 5.0, 1.0, SignRule::UniformRandomSign),
        _ => TiltPolicy::gaussian(10.0, 10.0, 1.0, SignRule::UniformRandomSign),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub object: String,
    /// Overrides the catalog grasp height, m.
    #[serde(default)]
    pub grasp_height: Option<f64>,
    pub mode: ControlMode,
    pub tilt_policy: TiltPolicy,
    pub trials: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        let spec = catalog.get(&self.object)?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        self.tilt_policy.validate()?;
        self.object_spec(spec).validate()
    }

    fn object_spec(&self, base: &RigidObjectSpec) -> RigidObjectSpec {
        let mut s = base.clone();
        if let Some(g) = self.grasp_height {
            s.grasp_height = g;
        }
        s
    }
}

/// Stable 64-bit FNV-1a, used to name random streams.
fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.iter().chain(&[0xff]) {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Independent random stream for one purpose of one trial. The tilt stream
/// ignores the control mode so both modes see the same tilts.
pub fn trial_rng(seed: u64, purpose: &str, object: &str, grasp_height: f64, trial: usize, mode: Option<ControlMode>) -> ChaCha8Rng {
    let mode = mode.map(|m| m.label()).unwrap_or("");
    let stream = fnv1a(&[
        purpose.as_bytes(),
        object.as_bytes(),
        &grasp_height.to_bits().to_le_bytes(),
        &(trial as u64).to_le_bytes(),
        mode.as_bytes(),
    ]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pre-placing world: object held at the sampled tilt with its lowest
/// support point `clearance` above the table.
pub fn preplacing_world(spec: &RigidObjectSpec, roll_deg: f64, pitch_deg: f64, cfg: &SimConfig) -> WorldState {
    let rot = Rotation3::from_euler_angles(roll_deg.to_radians(), pitch_deg.to_radians(), cfg.ee_yaw);
    let lowest = spec.support_points().iter().map(|p| (rot * p).z).fold(f64::INFINITY, f64::min);
    let obj = Vector3::new(0.0, 0.0, cfg.controller.approach_clearance - lowest);
    let ee = Pose6::from_rotation(obj + rot * spec.grasp_point(), rot);
    WorldState::grasped(spec, ee, 0.0, cfg.contact)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub tilt_deg: (f64, f64),
    pub outcome: TrialOutcome,
}

/// Runs one trial of a scenario.
pub fn run_trial(scenario: &Scenario, spec: &RigidObjectSpec, cfg: &SimConfig, trial: usize, opts: RunOptions) -> Result<TrialRecord> {
    let g = spec.grasp_height;
    let mut tilt_rng = trial_rng(scenario.seed, "tilt", &spec.name, g, trial, None);
    let (roll, pitch) = sample_tilt(&scenario.tilt_policy, &mut tilt_rng);
    let mut rng = trial_rng(scenario.seed, "sensor", &spec.name, g, trial, Some(scenario.mode));
    let world = preplacing_world(spec, roll, pitch, cfg);
    let mut sensors = Sensors::new(cfg.gelsight, cfg.ft, &mut rng)?;
    sensors.calibrate(spec, &world, &mut rng)?;
    let mut outcome = run_placement(scenario.mode, spec, world, &mut sensors, &cfg.controller, &mut rng, opts)?;
    if cfg.readout_noise_deg > 0.0 {
        let mut r = trial_rng(scenario.seed, "readout", &spec.name, g, trial, Some(scenario.mode));
        let n = Normal::new(0.0, cfg.readout_noise_deg).expect("validated std");
        outcome.roll_deg += n.sample(&mut r);
        outcome.pitch_deg += n.sample(&mut r);
    }
    Ok(TrialRecord { trial, tilt_deg: (roll, pitch), outcome })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Per-cell aggregates. Mean/std are `None` whenever any trial toppled or
/// had an error above 2°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub roll: Option<MeanStd>,
    pub pitch: Option<MeanStd>,
    pub all: Option<MeanStd>,
    pub count_lt_1deg: usize,
    pub count_lt_2deg: usize,
    pub topples: usize,
    pub trials: usize,
}

/// Mean and sample standard deviation (n - 1; zero for one sample).
pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

impl BatchStats {
    pub fn from_outcomes<'a>(outcomes: impl IntoIterator<Item = &'a TrialOutcome>) -> Self {
        let outcomes: Vec<&TrialOutcome> = outcomes.into_iter().collect();
        let roll: Vec<f64> = outcomes.iter().map(|o| o.roll_deg.abs()).collect();
        let pitch: Vec<f64> = outcomes.iter().map(|o| o.pitch_deg.abs()).collect();
        let topples = outcomes.iter().filter(|o| o.toppled).count();
        let report = !outcomes.is_empty() && topples == 0 && roll.iter().chain(&pitch).all(|e| *e <= 2.0);
        let all: Vec<f64> = roll.iter().chain(&pitch).copied().collect();
        Self {
            roll: report.then(|| mean_std(&roll)),
            pitch: report.then(|| mean_std(&pitch)),
            all: report.then(|| mean_std(&all)),
            count_lt_1deg: outcomes.iter().filter(|o| o.success(1.0)).count(),
            count_lt_2deg: outcomes.iter().filter(|o| o.success(2.0)).count(),
            topples,
            trials: outcomes.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub scenario: Scenario,
    pub grasp_height: f64,
    pub stats: BatchStats,
    pub trials: Vec<TrialRecord>,
}

impl BatchResult {
    pub fn row(&self) -> crate::report::ReportRow {
        crate::report::ReportRow {
            object: self.scenario.object.clone(),
            grasp_height: self.grasp_height,
            mode: self.scenario.mode,
            stats: self.stats,
        }
    }
}

pub fn run_batch(scenario: &Scenario, catalog: &Catalog, cfg: &SimConfig) -> Result<BatchResult> {
    Ok(run_batches(std::slice::from_ref(scenario), catalog, cfg)?.remove(0))
}

/// Runs every trial of every scenario in parallel; results come back in
/// scenario and trial order regardless of scheduling.
pub fn run_batches(scenarios: &[Scenario], catalog: &Catalog, cfg: &SimConfig) -> Result<Vec<BatchResult>> {
    cfg.validate()?;
    let mut specs = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        s.validate(catalog)?;
        specs.push(s.object_spec(catalog.get(&s.object)?));
    }
    let jobs: Vec<(usize, usize)> =
        scenarios.iter().enumerate().flat_map(|(i, s)| (0..s.trials).map(move |t| (i, t))).collect();
    let records: Vec<Result<TrialRecord>> = jobs
        .par_iter()
        .map(|&(i, t)| run_trial(&scenarios[i], &specs[i], cfg, t, RunOptions::default()))
        .collect();
    let mut records = records.into_iter();
    let mut out = Vec::with_capacity(scenarios.len());
    for (s, spec) in scenarios.iter().zip(&specs) {
        let trials = records.by_ref().take(s.trials).collect::<Result<Vec<_>>>()?;
        let stats = BatchStats::from_outcomes(trials.iter().map(|r| &r.outcome));
        out.push(BatchResult { scenario: s.clone(), grasp_height: spec.grasp_height, stats, trials });
    }
    Ok(out)
}

pub fn table1_scenarios(cfg: &SimConfig) -> Vec<Scenario> {
    let mut v = Vec::new();
    for object in [catalog::LARGE_RECTANGULAR, catalog::SMALL_RECTANGULAR] {
        for g in TABLE1_GRASP_HEIGHTS {
            for mode in MODES {
                v.push(Scenario {
                    object: object.into(),
                    grasp_height: Some(g),
                    mode,
                    tilt_policy: TiltPolicy::fixed(10.0, 10.0),
                    trials: cfg.trials,
                    seed: cfg.seed,
                });
            }
        }
    }
    v
}

pub fn table2_scenarios(catalog: &Catalog, cfg: &SimConfig) -> Vec<Scenario> {
    catalog
        .objects
        .iter()
        .flat_map(|o| {
            MODES.map(|mode| Scenario {
                object: o.name.clone(),
                grasp_height: None,
                mode,
                tilt_policy: table2_tilt_policy(&o.name),
                trials: cfg.trials,
                seed: cfg.seed,
            })
        })
        .collect()
}

/// Grasp-height and support-size grid on the two rectangular blocks.
pub fn run_table1(catalog: &Catalog, cfg: &SimConfig) -> Result<Vec<BatchResult>> {
    run_batches(&table1_scenarios(cfg), catalog, cfg)
}

/// Every catalog object in both modes.
pub fn run_table2(catalog: &Catalog, cfg: &SimConfig) -> Result<Vec<BatchResult>> {
    run_batches(&table2_scenarios(catalog, cfg), catalog, cfg)
}
