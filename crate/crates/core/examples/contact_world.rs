//! The quasi-static world on its own: how the table pushes back on a tilted
//! block, and where it topples.

use tactile_placing::experiment::preplacing_world;
use tactile_placing::world::{contact_state, corrective_wrench, step, topple_check};
use tactile_placing::{Catalog, SimConfig};

fn main() -> tactile_placing::Result<()> {
    let catalog = Catalog::default();
    let cfg = SimConfig::default();
    let spec = catalog.get("small rectangular")?;

    // Lower a block pitched by 10 degrees until it carries about 5 N.
    let mut world = preplacing_world(spec, 0.0, 10.0, &cfg);
    let mut t = 0.0;
    while world.press_force_z < 5.0 {
        world = step(spec, &world, &[0.0, 0.0, -0.005, 0.0, 0.0, 0.0], 0.005);
        t += 0.005;
    }
    let c = contact_state(spec, &world);
    let w = corrective_wrench(spec, &world)?;
    println!("after {t:.2} s: {} contact points, N = {:.2} N", c.contact_points.len(), c.normal_force);
    println!("lever arm (x, y) = ({:+.4}, {:+.4}) m", c.lever_arm.x, c.lever_arm.y);
    println!("corrective torque (x, y) = ({:+.4}, {:+.4}) N·m", w.torque.x, w.torque.y);

    // Released at increasing tilt: the block falls over beyond atan(w/2 / h_com).
    let limit = spec.tipping_angle(0.015).to_degrees();
    println!("tipping angle: {limit:.1} deg");
    for deg in [10.0, 20.0, limit - 0.5, limit + 0.5, 30.0] {
        let w = preplacing_world(spec, 0.0, deg, &cfg);
        println!("  released at {deg:5.1} deg: toppled = {}", topple_check(spec, &w));
    }
    Ok(())
}
