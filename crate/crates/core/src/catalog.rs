//! The built-in object set and its JSON file format.
//!
//! Only the two rectangular blocks have measured dimensions and mass; every
//! other entry is a desk-scale stand-in chosen to exercise one scenario
//! family (narrow or wide support, point contacts, soft base, offset or
//! moving centre of mass).

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{ContactType, RigidObjectSpec};

pub const SMALL_RECTANGULAR: &str = "small rectangular";
pub const LARGE_RECTANGULAR: &str = "large rectangular";
pub const JOINT: &str = "Joint";
pub const CONVERSION_CONNECTOR: &str = "conversion connector";
pub const HAND_CREAM_TUBE: &str = "hand cream tube";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub objects: Vec<RigidObjectSpec>,
}

impl Catalog {
    pub fn new(objects: Vec<RigidObjectSpec>) -> Result<Self> {
        let c = Self { objects };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, o) in self.objects.iter().enumerate() {
            o.validate()?;
            if self.objects[..i].iter().any(|p| p.name == o.name) {
                return Err(Error::InvalidConfig(format!("duplicate object `{}`", o.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&RigidObjectSpec> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(|o| o.name.as_str())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Catalog = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

impl Default for Catalog {
    fn default() -> Self {
        builtin()
    }
}

fn rect(w: f64, d: f64) -> Vec<[f64; 2]> {
    let (x, y) = (w / 2.0, d / 2.0);
    vec![[-x, -y], [x, -y], [x, y], [-x, y]]
}

fn disc(r: f64, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

fn feet(points: &[[f64; 2]]) -> Option<Vec<[f64; 3]>> {
    Some(points.iter().map(|p| [p[0], p[1], 0.0]).collect())
}

fn flat(name: &str, base: Vec<[f64; 2]>, height: f64, grasp: f64, com: [f64; 3], mass: f64) -> RigidObjectSpec {
    RigidObjectSpec {
        name: name.into(),
        support_polygon: base,
        height,
        grasp_height: grasp,
        com_offset: com,
        contact_type: ContactType::FlatFace,
        point_contacts: None,
        compliance: 0.0,
        mass,
        liquid_shift: 0.0,
    }
}

fn points(name: &str, contacts: &[[f64; 2]], height: f64, grasp: f64, com: [f64; 3], mass: f64) -> RigidObjectSpec {
    RigidObjectSpec {
        contact_type: ContactType::PointSet,
        point_contacts: feet(contacts),
        support_polygon: contacts.to_vec(),
        ..flat(name, Vec::new(), height, grasp, com, mass)
    }
}

/// The 18 built-in objects, in reporting order.
pub fn builtin() -> Catalog {
    let objects = vec![
        flat(SMALL_RECTANGULAR, rect(0.030, 0.030), 0.070, 0.025, [0.0, 0.0, 0.035], 0.142),
        flat(LARGE_RECTANGULAR, rect(0.050, 0.050), 0.070, 0.025, [0.0, 0.0, 0.035], 0.142),
        flat("wooden rectangular", rect(0.034, 0.030), 0.090, 0.030, [0.0, 0.0, 0.045], 0.060),
        flat("wooden cylinder", disc(0.018, 16), 0.080, 0.030, [0.0, 0.0, 0.040], 0.070),
        flat("beaker", disc(0.022, 16), 0.070, 0.035, [0.0, 0.0, 0.025], 0.090),
        flat("metal rectangular", rect(0.060, 0.045), 0.040, 0.025, [0.0, 0.0, 0.020], 0.450),
        flat("V block", rect(0.032, 0.028), 0.040, 0.030, [0.0, 0.0, 0.018], 0.250),
        RigidObjectSpec {
            compliance: 6e-5,
            ..flat(JOINT, rect(0.040, 0.030), 0.080, 0.070, [0.0, 0.0, 0.030], 0.070)
        },
        flat("LEGO blocks", rect(0.032, 0.032), 0.058, 0.030, [0.004, -0.002, 0.026], 0.030),
        flat("metal object", rect(0.032, 0.028), 0.050, 0.030, [-0.005, 0.003, 0.020], 0.180),
        points(
            "metal pedestal",
            &[[-0.030, -0.030], [0.030, -0.030], [0.030, 0.030], [-0.030, 0.030]],
            0.060,
            0.030,
            [0.0, 0.0, 0.020],
            0.300,
        ),
        points(
            CONVERSION_CONNECTOR,
            &[[-0.008, -0.016], [0.008, -0.016], [0.008, 0.016], [-0.008, 0.016]],
            0.045,
            0.030,
            [0.0, 0.0, 0.018],
            0.060,
        ),
        RigidObjectSpec {
            compliance: 5e-5,
            ..flat("wood bond tube", disc(0.016, 12), 0.110, 0.035, [0.0, 0.0, 0.040], 0.060)
        },
        RigidObjectSpec {
            compliance: 5e-5,
            ..flat(HAND_CREAM_TUBE, rect(0.024, 0.020), 0.120, 0.030, [0.0, 0.0, 0.045], 0.050)
        },
        points(
            "test tube stand",
            &[[-0.040, -0.020], [0.040, -0.020], [0.040, 0.020], [-0.040, 0.020]],
            0.070,
            0.030,
            [0.0, 0.0, 0.030],
            0.120,
        ),
        points(
            "metal part",
            &[[0.030, 0.0], [-0.020, 0.030], [-0.020, -0.030]],
            0.035,
            0.025,
            [0.0, 0.0, 0.012],
            0.250,
        ),
        points("round bottom flask", &disc(0.014, 8), 0.120, 0.040, [0.0, 0.0, 0.030], 0.110),
        RigidObjectSpec {
            liquid_shift: 0.008,
            ..flat("bottle with liquid", disc(0.028, 16), 0.150, 0.035, [0.0, 0.0, 0.050], 0.350)
        },
    ];
    Catalog::new(objects).expect("built-in catalog is valid")
}
