//! Configuration and catalog files: override a few parameters from JSON,
//! add an object, and run it.

use tactile_placing::experiment::{run_batch, TiltPolicy};
use tactile_placing::experiment::SignRule;
use tactile_placing::world::ContactType;
use tactile_placing::{Catalog, ControlMode, RigidObjectSpec, Scenario, SimConfig};

fn main() -> tactile_placing::Result<()> {
    let dir = std::env::temp_dir().join("tactile_placing_example");
    std::fs::create_dir_all(&dir)?;

    let mut catalog = Catalog::default();
    catalog.objects.push(RigidObjectSpec {
        name: "mug".into(),
        support_polygon: vec![[-0.03, -0.03], [0.03, -0.03], [0.03, 0.03], [-0.03, 0.03]],
        height: 0.09,
        grasp_height: 0.06,
        com_offset: [0.0, 0.0, 0.04],
        contact_type: ContactType::FlatFace,
        point_contacts: None,
        compliance: 0.0,
        mass: 0.3,
        liquid_shift: 0.005,
    });
    catalog.validate()?;
    catalog.save(dir.join("catalog.json"))?;

    // Relative catalog paths resolve against the config file's directory.
    std::fs::write(
        dir.join("config.json"),
        r#"{ "seed": 7, "trials": 5, "catalog": "catalog.json", "ft": { "noise_std_torque": 0.01 } }"#,
    )?;
    let cfg = SimConfig::load(dir.join("config.json"))?;
    let catalog = cfg.load_catalog()?;
    println!("{} objects, seed {}, F/T torque noise {} N·m", catalog.objects.len(), cfg.seed, cfg.ft.noise_std_torque);

    for mode in [ControlMode::Tactile, ControlMode::FtBaseline] {
        let scenario = Scenario {
            object: "mug".into(),
            grasp_height: None,
            mode,
            tilt_policy: TiltPolicy::gaussian(8.0, 8.0, 1.0, SignRule::UniformRandomSign),
            trials: cfg.trials,
            seed: cfg.seed,
        };
        let r = run_batch(&scenario, &catalog, &cfg)?;
        println!("{mode:7}: {}/{} under 1 deg, {} toppled", r.stats.count_lt_1deg, r.stats.trials, r.stats.topples);
    }
    Ok(())
}
