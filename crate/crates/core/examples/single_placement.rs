//! One placement in each mode with per-step telemetry written as CSV.
//!
//! ```text
//! cargo run --example single_placement -- "wooden cylinder" /tmp/out
//! ```

use std::path::PathBuf;

use tactile_placing::controller::{write_telemetry, RunOptions};
use tactile_placing::experiment::{run_trial, table2_tilt_policy};
use tactile_placing::{Catalog, ControlMode, Scenario, SimConfig};

fn main() -> tactile_placing::Result<()> {
    let mut args = std::env::args().skip(1);
    let object = args.next().unwrap_or_else(|| "large rectangular".into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let cfg = SimConfig::default();
    let catalog = Catalog::default();
    let spec = catalog.get(&object)?;

    for mode in [ControlMode::Tactile, ControlMode::FtBaseline] {
        let scenario = Scenario {
            object: object.clone(),
            grasp_height: None,
            mode,
            tilt_policy: table2_tilt_policy(&object),
            trials: 1,
            seed: cfg.seed,
        };
        let rec = run_trial(&scenario, spec, &cfg, 0, RunOptions { telemetry: true })?;
        let o = &rec.outcome;
        println!(
            "{mode:7}: tilt ({:+.2}, {:+.2}) deg -> error ({:+.3}, {:+.3}) deg, {:?}, {} steps after contact",
            rec.tilt_deg.0, rec.tilt_deg.1, o.roll_deg, o.pitch_deg, o.termination, o.steps
        );
        let path = out.join(format!("placement_{mode}.csv"));
        write_telemetry(&o.telemetry, std::fs::File::create(&path)?)?;
        println!("         {} rows -> {}", o.telemetry.len(), path.display());
    }
    Ok(())
}
