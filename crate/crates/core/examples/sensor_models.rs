//! The two sensor models side by side: dot fields for pitch and roll
//! torques, and the wrist sensor's offset capture and cable bias.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tactile_placing::frames::rotation_from_rpy;
use tactile_placing::sensors::{ft_capture_offset, ft_read, gelsight_respond, FTSensorModel, FtState, GelSightModel, GelSightPair};
use tactile_placing::tactile::features;
use tactile_placing::{Pose6, Wrench};

fn main() -> tactile_placing::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gel = GelSightModel::default();
    let pair = GelSightPair::new(&gel, &mut rng)?;

    println!("tactile features (jitter {} mm):", gel.jitter_std);
    for (name, w) in [
        ("pitch +0.05 N·m", [0.0, 0.0, 0.0, 0.0, 0.05, 0.0]),
        ("pitch -0.05 N·m", [0.0, 0.0, 0.0, 0.0, -0.05, 0.0]),
        ("roll  +0.05 N·m", [0.0, 0.0, 0.0, 0.05, 0.0, 0.0]),
        ("press 5 N", [0.0, 0.0, 5.0, 0.0, 0.0, 0.0]),
    ] {
        let (l, r) = gelsight_respond(&gel, &pair, &Wrench::from_array(w), w[2], &mut rng);
        let f = features(&l, &r)?;
        println!("  {name:16} curl {:+.5}  diff {:+.4} mm", f.curl_mean, f.diff_z);
    }

    // Wrist sensor: offset captured while tilted 10 degrees, then read again
    // after levelling and lowering by 15 mm under the same load.
    let ft = FTSensorModel { noise_std_force: 0.0, noise_std_torque: 0.0, cable_height_gain_std: [0.0; 2], ..FTSensorModel::default() };
    let mut st = FtState::new(&ft, &mut rng);
    let load = Wrench::zero();
    let tilted = Pose6::from_rotation(Vector3::new(0.0, 0.0, 0.1), rotation_from_rpy(10f64.to_radians(), 0.0, 0.0));
    ft_read(&ft, &load, &tilted, &mut rng, &mut st);
    let reading = st.last_reading();
    ft_capture_offset(&ft, &mut st, &reading)?;
    println!("wrist sensor, zero true load:");
    let at_capture = ft_read(&ft, &load, &tilted, &mut rng, &mut st);
    println!("  at capture pose      tau_x = {:+.4} N·m", at_capture.torque.x);
    let level = Pose6::from_rotation(Vector3::new(0.0, 0.0, 0.085), rotation_from_rpy(0.0, 0.0, 0.0));
    let mut last = at_capture;
    for _ in 0..200 {
        last = ft_read(&ft, &load, &level, &mut rng, &mut st);
    }
    println!("  level, 15 mm lower   tau_x = {:+.4} N·m (cable bias)", last.torque.x);
    Ok(())
}
