//! JSON simulation configuration. Every field is optional in the file;
//! missing fields take their defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::sensors::{FTSensorModel, GelSightModel};
use crate::world::ContactModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: usize,
    /// EE yaw in the pre-placing pose, rad.
    pub ee_yaw: f64,
    /// Gaussian noise on the final error readout, degrees (0 = exact).
    pub readout_noise_deg: f64,
    pub controller: ControllerConfig,
    pub gelsight: GelSightModel,
    pub ft: FTSensorModel,
    pub contact: ContactModel,
    /// Optional catalog file replacing the built-in objects.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 10,
            ee_yaw: 0.0,
            readout_noise_deg: 0.0,
            controller: ControllerConfig::default(),
            gelsight: GelSightModel::default(),
            ft: FTSensorModel::default(),
            contact: ContactModel::default(),
            catalog: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if !self.ee_yaw.is_finite() || !(self.readout_noise_deg >= 0.0) {
            return Err(Error::InvalidConfig("ee_yaw must be finite and readout_noise_deg >= 0".into()));
        }
        self.controller.validate()?;
        self.gelsight.validate()?;
        self.ft.validate()?;
        self.contact.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: SimConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a config file; a relative `catalog` path is resolved against
    /// the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut c = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let (Some(cat), Some(dir)) = (&c.catalog, path.parent()) {
            if cat.is_relative() {
                c.catalog = Some(dir.join(cat));
            }
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load_catalog(&self) -> Result<Catalog> {
        match &self.catalog {
            Some(p) => Catalog::load(p),
            None => Ok(Catalog::default()),
        }
    }

    /// Same configuration with the wrist sensor's noise and cable bias off.
    pub fn without_ft_disturbances(&self) -> Self {
        Self { ft: FTSensorModel { lowpass_cutoff: self.ft.lowpass_cutoff, ..FTSensorModel::ideal() }, ..self.clone() }
    }

    /// Same configuration with every sensor noise source off.
    pub fn noiseless(&self) -> Self {
        let mut c = self.without_ft_disturbances();
        c.gelsight.jitter_std = 0.0;
        c
    }
}
