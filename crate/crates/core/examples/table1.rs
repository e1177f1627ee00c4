//! Grasp height and support size grid on the two rectangular blocks,
//! followed by the qualitative checks.

use tactile_placing::checks::check_table1;
use tactile_placing::experiment::{run_table1, BatchResult};
use tactile_placing::report::emit_report;
use tactile_placing::{Catalog, ReportFormat, SimConfig};

fn main() -> tactile_placing::Result<()> {
    let cfg = SimConfig::default();
    let results = run_table1(&Catalog::default(), &cfg)?;
    let rows: Vec<_> = results.iter().map(BatchResult::row).collect();
    print!("{}", String::from_utf8_lossy(&emit_report(&rows, ReportFormat::Txt)?));
    for c in check_table1(&results) {
        println!("{c}");
    }
    Ok(())
}
