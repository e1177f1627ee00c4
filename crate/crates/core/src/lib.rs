//! Simulation of tactile stable object placing.
//!
//! A grasped object is lowered onto a table at an unknown tilt and rotated
//! about the fingertip midpoint until the table's corrective torque
//! vanishes. The torque is either read from a wrist force/torque sensor or
//! replaced by two features of the dot-marker displacement on a pair of
//! vision-based tactile sensors: the mean curl of the field (pitch) and the
//! left/right difference of vertical shear (roll).
//!
//! Module map:
//!
//! * [`frames`]: poses, wrenches, the rigid wrench transform.
//! * [`tactile`]: dot grids, matching, curl and diff features.
//! * [`sensors`]: synthetic tactile and wrist sensor readings.
//! * [`world`]: object/table contact, kinematics, topple detection.
//! * [`catalog`]: built-in objects and their JSON format.
//! * [`controller`]: the admittance placing loop.
//! * [`experiment`]: trial protocol, statistics and the benchmark tables.
//! * [`report`]: CSV and text output.
//! * [`checks`]: qualitative pass/fail checks on the tables.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod checks;
pub mod config;
pub mod controller;
pub mod error;
pub mod experiment;
pub mod frames;
pub mod report;
pub mod sensors;
pub mod tactile;
pub mod world;

pub use catalog::Catalog;
pub use config::SimConfig;
pub use controller::{ControlMode, ControllerConfig, TrialOutcome};
pub use error::{Error, Result};
pub use experiment::{BatchStats, Scenario, TiltPolicy};
pub use frames::{FrameTransform, Pose6, Wrench};
pub use report::{ReportFormat, ReportRow};
pub use tactile::{DotField, DotGrid, TactileFeatures};
pub use world::{RigidObjectSpec, WorldState};
