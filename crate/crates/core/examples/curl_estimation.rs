//! Curl and Diff on synthetic dot fields: rigid rotation, uniform shear,
//! dot dropout, and recovery of correspondences by nearest-neighbour
//! matching.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tactile_placing::tactile::{curl_mean, diff_z, match_dots, CurlEstimator};
use tactile_placing::{DotField, DotGrid};

fn rotated(grid: &DotGrid, omega: f64) -> DotField {
    let disp: Vec<Vector2<f64>> = grid.rest.iter().map(|p| Vector2::new(-omega * p.y, omega * p.x)).collect();
    DotField::from_displacements(grid.clone(), &disp, vec![true; grid.len()])
}

fn main() -> tactile_placing::Result<()> {
    let grid = DotGrid::regular(9, 7, 2.0, 0.4)?;

    // Counter-clockwise rotation at rate w, A = (-w z, w x), has curl 2w.
    for omega in [0.05, 0.1, 0.5] {
        let f = rotated(&grid, omega);
        println!("rotation {omega:4}: curl_mean = {:+.6}", curl_mean(&f)?);
    }

    let shear = vec![Vector2::new(0.0, 0.3); grid.len()];
    let f = DotField::from_displacements(grid.clone(), &shear, vec![true; grid.len()]);
    println!("uniform z shear 0.3 mm: curl_mean = {:+.2e}", curl_mean(&f)?);

    // Opposite shear on the two faces is what a roll torque produces.
    let down = vec![Vector2::new(0.0, -0.3); grid.len()];
    let g = DotField::from_displacements(grid.clone(), &down, vec![true; grid.len()]);
    println!("opposite shear on the faces: diff = {:+.3} mm", diff_z(&f, &g)?.diff_z);

    // 30 % of the dots lost.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let valid: Vec<bool> = (0..grid.len()).map(|_| rng.random::<f64>() >= 0.3).collect();
    let mut f = rotated(&grid, 0.1);
    f.valid = valid.clone();
    let est = CurlEstimator::new(&grid, &valid)?;
    println!("30% dropout ({} dots left): curl_mean = {:+.6}", est.dot_count(), est.curl_mean(&f));

    // Unordered observations matched back to the reference grid.
    let mut observed = rotated(&grid, 0.05).current;
    observed.reverse();
    let matched = match_dots(&grid, &observed)?;
    println!("matched {} of {} dots, curl_mean = {:+.6}", matched.valid_count(), grid.len(), curl_mean(&matched)?);

    let t = std::time::Instant::now();
    let f = rotated(&grid, 0.1);
    let n = 1000;
    for _ in 0..n {
        std::hint::black_box(curl_mean(std::hint::black_box(&f))?);
    }
    println!("curl_mean incl. stencil setup: {:.1} us per field", t.elapsed().as_secs_f64() * 1e6 / n as f64);
    Ok(())
}
