//! Every catalog object in both modes, then the same sweep with a perfect
//! wrist sensor to show where the baseline's failures come from.

use tactile_placing::checks::{check_same_counts, check_table2};
use tactile_placing::controller::ControlMode;
use tactile_placing::experiment::{run_batches, run_table2, table2_scenarios, BatchResult};
use tactile_placing::report::emit_report;
use tactile_placing::{Catalog, ReportFormat, SimConfig};

fn main() -> tactile_placing::Result<()> {
    let cfg = SimConfig::default();
    let catalog = Catalog::default();
    let t = std::time::Instant::now();
    let results = run_table2(&catalog, &cfg)?;
    let rows: Vec<_> = results.iter().map(BatchResult::row).collect();
    print!("{}", String::from_utf8_lossy(&emit_report(&rows, ReportFormat::Txt)?));
    println!("({} trials in {:.2} s)", results.len() * cfg.trials, t.elapsed().as_secs_f64());
    for c in check_table2(&results) {
        println!("{c}");
    }

    let clean = cfg.without_ft_disturbances();
    let ft: Vec<_> = table2_scenarios(&catalog, &clean).into_iter().filter(|s| s.mode == ControlMode::FtBaseline).collect();
    let ft = run_batches(&ft, &catalog, &clean)?;
    let tactile: Vec<_> = results.into_iter().filter(|r| r.scenario.mode == ControlMode::Tactile).collect();
    println!("{}", check_same_counts("ideal wrist sensor matches tactile", &tactile, &ft));
    Ok(())
}
