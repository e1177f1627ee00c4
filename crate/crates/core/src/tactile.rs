//! Black-dot displacement fields on the two GelSight faces and the two scalar
//! features computed from them: the mean curl of the field (pitch surrogate)
//! and the left/right difference of mean vertical displacement (roll
//! surrogate).
//!
//! Face coordinates are millimetres in the tactile frame: `x` horizontal
//! (parallel to the EE `x` axis) and `z` vertical. Both faces use the same
//! axes, so no mirroring happens between the left and right sensor.

use std::io::Write;

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neighbours used by the local affine gradient fit (the dot itself is added).
pub const DEFAULT_NEIGHBORS: usize = 8;

/// Minimum number of valid dots for a curl estimate.
pub const MIN_CURL_DOTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceExtent {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl FaceExtent {
    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.z_min && p.y <= self.z_max
    }
}

/// Rest positions of the dots on one sensor face. `Vector2` components are
/// `(x, z)` in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotGrid {
    pub rest: Vec<Vector2<f64>>,
    pub dot_radius: f64,
    pub extent: FaceExtent,
}

impl DotGrid {
    pub fn new(rest: Vec<Vector2<f64>>, dot_radius: f64, extent: FaceExtent) -> Result<Self> {
        if rest.len() < 4 {
            return Err(Error::InvalidConfig(format!("dot grid needs >= 4 dots, got {}", rest.len())));
        }
        if !(dot_radius > 0.0) {
            return Err(Error::InvalidConfig("dot radius must be positive".into()));
        }
        if let Some(p) = rest.iter().find(|p| !extent.contains(p)) {
            return Err(Error::InvalidConfig(format!("dot ({}, {}) outside face extent", p.x, p.y)));
        }
        let grid = Self { rest, dot_radius, extent };
        if grid.min_spacing() <= dot_radius {
            return Err(Error::InvalidConfig("dots closer than one dot radius".into()));
        }
        Ok(grid)
    }

    /// `cols` x `rows` regular lattice centred on the face origin, with a one
    /// spacing margin to the face border.
    pub fn regular(cols: usize, rows: usize, spacing: f64, dot_radius: f64) -> Result<Self> {
        let half_w = spacing * (cols as f64 - 1.0) / 2.0;
        let half_h = spacing * (rows as f64 - 1.0) / 2.0;
        let extent = FaceExtent {
            x_min: -half_w - spacing / 2.0,
            x_max: half_w + spacing / 2.0,
            z_min: -half_h - spacing / 2.0,
            z_max: half_h + spacing / 2.0,
        };
        let rest = (0..rows)
            .flat_map(|r| {
                (0..cols).map(move |c| {
                    Vector2::new(c as f64 * spacing - half_w, r as f64 * spacing - half_h)
                })
            })
            .collect();
        Self::new(rest, dot_radius, extent)
    }

    pub fn len(&self) -> usize {
        self.rest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rest.is_empty()
    }

    pub fn min_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.rest.iter().enumerate() {
            for b in &self.rest[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// Radius within which an observed point may be matched to a rest dot.
    pub fn match_radius(&self) -> f64 {
        self.min_spacing() / 2.0
    }
}

/// Current dot positions on one face, index-aligned with the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotField {
    pub grid: DotGrid,
    pub current: Vec<Vector2<f64>>,
    pub valid: Vec<bool>,
}

impl DotField {
    pub fn at_rest(grid: DotGrid) -> Self {
        let current = grid.rest.clone();
        let valid = vec![true; current.len()];
        Self { grid, current, valid }
    }

    pub fn from_displacements(grid: DotGrid, disp: &[Vector2<f64>], valid: Vec<bool>) -> Self {
        assert_eq!(disp.len(), grid.len());
        assert_eq!(valid.len(), grid.len());
        let current = grid.rest.iter().zip(disp).map(|(r, d)| r + d).collect();
        Self { grid, current, valid }
    }

    pub fn displacement(&self, i: usize) -> Vector2<f64> {
        self.current[i] - self.grid.rest[i]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Mean vertical displacement over valid dots.
    pub fn mean_z(&self) -> Option<f64> {
        let (sum, n) = (0..self.current.len())
            .filter(|&i| self.valid[i])
            .fold((0.0, 0usize), |(s, n), i| (s + self.displacement(i).y, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// Debug dump: `dot_id,x_rest,z_rest,dx,dz,valid`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dot_id", "x_rest", "z_rest", "dx", "dz", "valid"])?;
        for i in 0..self.current.len() {
            let d = self.displacement(i);
            let r = self.grid.rest[i];
            w.write_record([
                i.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                d.x.to_string(),
                d.y.to_string(),
                (self.valid[i] as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scalar tactile features of one left/right frame pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TactileFeatures {
    pub curl_mean: f64,
    pub diff_z: f64,
    pub mean_z_left: f64,
    pub mean_z_right: f64,
}

/// Makes the current positions the new rest positions.
pub fn snapshot_reference(field: &DotField) -> DotGrid {
    DotGrid {
        rest: field
            .current
            .iter()
            .zip(&field.grid.rest)
            .zip(&field.valid)
            .map(|((c, r), v)| if *v { *c } else { *r })
            .collect(),
        dot_radius: field.grid.dot_radius,
        extent: field.grid.extent,
    }
}

/// Greedy injective nearest-neighbour assignment of observed points to the
/// reference dots, in ascending distance order, within the grid's match
/// radius. Unmatched dots are masked.
pub fn match_dots(reference: &DotGrid, observed: &[Vector2<f64>]) -> Result<DotField> {
    let radius = reference.match_radius();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, r) in reference.rest.iter().enumerate() {
        for (j, o) in observed.iter().enumerate() {
            let d = (r - o).norm();
            if d <= radius {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut current = reference.rest.clone();
    let mut valid = vec![false; reference.len()];
    let mut taken = vec![false; observed.len()];
    for (_, i, j) in pairs {
        if !valid[i] && !taken[j] {
            valid[i] = true;
            taken[j] = true;
            current[i] = observed[j];
        }
    }
    let matched = valid.iter().filter(|v| **v).count();
    if matched < 4 {
        return Err(Error::MatchingDegenerate { matched });
    }
    Ok(DotField { grid: reference.clone(), current, valid })
}

/// `(neighbour index, d/dx weight, d/dz weight)`.
type Weight = (usize, f64, f64);

/// Precomputed local least-squares gradient operators for one grid and mask.
///
/// For every valid dot, `A_x` and `A_z` are fitted as affine functions of
/// `(x, z)` over the dot and its nearest valid neighbours; the fitted slopes
/// are linear in the displacements, so the per-dot curl and its mean reduce
/// to fixed weights over the displacement components.
#[derive(Debug, Clone)]
pub struct CurlEstimator {
    valid: Vec<bool>,
    /// Per valid dot, its gradient weights.
    stencils: Vec<(usize, Vec<Weight>)>,
    /// Summed weights: `sum_i curl_i = sum_j (wx_j * A_z,j - wz_j * A_x,j)`.
    total_x: Vec<f64>,
    total_z: Vec<f64>,
}

impl CurlEstimator {
    pub fn new(grid: &DotGrid, valid: &[bool]) -> Result<Self> {
        Self::with_neighbors(grid, valid, DEFAULT_NEIGHBORS)
    }

    pub fn with_neighbors(grid: &DotGrid, valid: &[bool], k: usize) -> Result<Self> {
        assert_eq!(valid.len(), grid.len());
        let idx: Vec<usize> = (0..grid.len()).filter(|&i| valid[i]).collect();
        if idx.len() < MIN_CURL_DOTS {
            return Err(Error::DegenerateGeometry(format!(
                "{} valid dots, need at least {MIN_CURL_DOTS}",
                idx.len()
            )));
        }
        check_spans_plane(idx.iter().map(|&i| grid.rest[i]))?;

        let k = k.min(idx.len() - 1);
        let mut stencils = Vec::with_capacity(idx.len());
        let mut total_x = vec![0.0; grid.len()];
        let mut total_z = vec![0.0; grid.len()];
        let mut by_dist: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for &i in &idx {
            let p = grid.rest[i];
            by_dist.clear();
            by_dist.extend(idx.iter().map(|&j| ((grid.rest[j] - p).norm_squared(), j)));
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let hood: Vec<usize> = by_dist.iter().take(k + 1).map(|(_, j)| *j).collect();

            let h = (hood.iter().map(|&j| (grid.rest[j] - p).norm_squared()).sum::<f64>()
                / hood.len() as f64)
                .sqrt();
            let rows: Vec<Vector3<f64>> = hood
                .iter()
                .map(|&j| {
                    let d = (grid.rest[j] - p) / h;
                    Vector3::new(1.0, d.x, d.y)
                })
                .collect();
            let m: Matrix3<f64> = rows.iter().map(|r| r * r.transpose()).sum();
            if m.determinant() / (hood.len() as f64).powi(3) < 1e-9 {
                return Err(Error::DegenerateGeometry(format!(
                    "neighbourhood of dot {i} is rank-deficient"
                )));
            }
            let inv = m.try_inverse().ok_or_else(|| {
                Error::DegenerateGeometry(format!("neighbourhood of dot {i} is singular"))
            })?;
            let weights: Vec<(usize, f64, f64)> = hood
                .iter()
                .zip(&rows)
                .map(|(&j, r)| {
                    let c = inv * r;
                    (j, c.y / h, c.z / h)
                })
                .collect();
            for &(j, wx, wz) in &weights {
                total_x[j] += wx;
                total_z[j] += wz;
            }
            stencils.push((i, weights));
        }
        Ok(Self { valid: valid.to_vec(), stencils, total_x, total_z })
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn dot_count(&self) -> usize {
        self.stencils.len()
    }

    fn check_mask(&self, field: &DotField) {
        assert_eq!(field.valid, self.valid, "field mask differs from the estimator's mask");
    }

    /// Sum of per-dot curl over valid dots.
    pub fn curl_sum(&self, field: &DotField) -> f64 {
        self.check_mask(field);
        let mut s = 0.0;
        for j in 0..field.current.len() {
            if self.valid[j] {
                let a = field.displacement(j);
                s += self.total_x[j] * a.y - self.total_z[j] * a.x;
            }
        }
        s
    }

    pub fn curl_mean(&self, field: &DotField) -> f64 {
        self.curl_sum(field) / self.dot_count() as f64
    }

    /// `(dot index, ∂A_z/∂x − ∂A_x/∂z)` for every valid dot.
    pub fn per_dot_curl(&self, field: &DotField) -> Vec<(usize, f64)> {
        self.check_mask(field);
        self.stencils
            .iter()
            .map(|(i, w)| {
                let c = w.iter().fold(0.0, |acc, &(j, wx, wz)| {
                    let a = field.displacement(j);
                    acc + wx * a.y - wz * a.x
                });
                (*i, c)
            })
            .collect()
    }
}

fn check_spans_plane(points: impl Iterator<Item = Vector2<f64>>) -> Result<()> {
    let pts: Vec<_> = points.collect();
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<Vector2<f64>>() / n;
    let cov = pts.iter().fold(nalgebra::Matrix2::zeros(), |acc, p| {
        let d = p - mean;
        acc + d * d.transpose()
    }) / n;
    let eig = cov.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if hi <= 0.0 || lo / hi < 1e-9 {
        return Err(Error::DegenerateGeometry("valid dots are collinear".into()));
    }
    Ok(())
}

/// Mean curl of one field over its valid dots.
pub fn curl_mean(field: &DotField) -> Result<f64> {
    Ok(CurlEstimator::new(&field.grid, &field.valid)?.curl_mean(field))
}

/// `Diff` = mean `z` displacement of the left face (GelSight1) minus that of
/// the right face (GelSight2), over valid dots.
pub fn diff_z(left: &DotField, right: &DotField) -> Result<TactileFeatures> {
    let l = left
        .mean_z()
        .ok_or_else(|| Error::DegenerateGeometry("left face has no valid dots".into()))?;
    let r = right
        .mean_z()
        .ok_or_else(|| Error::DegenerateGeometry("right face has no valid dots".into()))?;
    Ok(TactileFeatures { curl_mean: 0.0, diff_z: l - r, mean_z_left: l, mean_z_right: r })
}

/// Both features of a frame pair. The curl is averaged uniformly over the
/// valid dots of both faces.
pub fn features_with(
    left: &DotField,
    right: &DotField,
    est_left: &CurlEstimator,
    est_right: &CurlEstimator,
) -> Result<TactileFeatures> {
    let mut f = diff_z(left, right)?;
    let n = (est_left.dot_count() + est_right.dot_count()) as f64;
    f.curl_mean = (est_left.curl_sum(left) + est_right.curl_sum(right)) / n;
    Ok(f)
}

pub fn features(left: &DotField, right: &DotField) -> Result<TactileFeatures> {
    let el = CurlEstimator::new(&left.grid, &left.valid)?;
    let er = CurlEstimator::new(&right.grid, &right.valid)?;
    features_with(left, right, &el, &er)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> DotGrid {
        DotGrid::regular(9, 7, 2.0, 0.4).unwrap()
    }

    fn field_from(grid: &DotGrid, f: impl Fn(f64, f64) -> (f64, f64)) -> DotField {
        let disp: Vec<_> = grid
            .rest
            .iter()
            .map(|p| {
                let (ax, az) = f(p.x, p.y);
                Vector2::new(ax, az)
            })
            .collect();
        DotField::from_displacements(grid.clone(), &disp, vec![true; grid.len()])
    }

    #[test]
    fn grid_validation() {
        assert!(DotGrid::regular(2, 1, 2.0, 0.4).is_err());
        let ext = FaceExtent { x_min: -1.0, x_max: 1.0, z_min: -1.0, z_max: 1.0 };
        let pts = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(0.1, 0.0),
            Vector2::new(0.0, 0.5),
            Vector2::new(0.5, 0.5),
        ];
        assert!(DotGrid::new(pts, 0.2, ext).is_err());
        let outside = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(2.0, 0.0),
            Vector2::new(0.0, 0.5),
            Vector2::new(0.5, 0.5),
        ];
        assert!(DotGrid::new(outside, 0.1, ext).is_err());
    }

    #[test]
    fn uniform_translation_has_zero_curl() {
        let f = field_from(&grid(), |_, _| (0.3, -0.2));
        assert!(curl_mean(&f).unwrap().abs() < 1e-9);
    }

    #[test]
    fn rigid_rotation_has_curl_two_omega() {
        let w = 0.1;
        let f = field_from(&grid(), |x, z| (-w * z, w * x));
        assert_abs_diff_eq!(curl_mean(&f).unwrap(), 2.0 * w, epsilon = 1e-9);
    }

    #[test]
    fn quadratic_field_matches_central_difference_oracle() {
        // A = (z^2, x z): curl = z - 2 z = -z analytically. The local affine
        // fit is not exact for a quadratic field, so the oracle evaluates the
        // same stencil geometry by central differences on a fine auxiliary
        // grid around each dot, and the comparison tolerance reflects the
        // fit's truncation error.
        let g = grid();
        let f = field_from(&g, |x, z| (z * z, x * z));
        let est = CurlEstimator::new(&g, &f.valid).unwrap();
        let h = 1e-4;
        let ax = |_x: f64, z: f64| z * z;
        let az = |x: f64, z: f64| x * z;
        let oracle: f64 = g
            .rest
            .iter()
            .map(|p| {
                let daz_dx = (az(p.x + h, p.y) - az(p.x - h, p.y)) / (2.0 * h);
                let dax_dz = (ax(p.x, p.y + h) - ax(p.x, p.y - h)) / (2.0 * h);
                daz_dx - dax_dz
            })
            .sum::<f64>()
            / g.len() as f64;
        // Symmetric grid: the mean of -z over the dots is zero.
        assert_abs_diff_eq!(oracle, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(est.curl_mean(&f), oracle, epsilon = 0.1);
        // Interior dots with a symmetric stencil recover the pointwise curl.
        let centre = g.rest.iter().position(|p| p.x == 0.0 && p.y == 0.0).unwrap();
        let per = est.per_dot_curl(&f);
        let c = per.iter().find(|(i, _)| *i == centre).unwrap().1;
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn collinear_dots_are_degenerate() {
        let g = grid();
        let valid: Vec<bool> = g.rest.iter().map(|p| p.y == 0.0).collect();
        let f = DotField { grid: g.clone(), current: g.rest.clone(), valid };
        assert!(matches!(curl_mean(&f), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn diff_examples() {
        let g = grid();
        let zero = DotField::at_rest(g.clone());
        assert_eq!(diff_z(&zero, &zero).unwrap().diff_z, 0.0);

        let left = field_from(&g, |_, _| (0.0, 0.3));
        let right = field_from(&g, |_, _| (0.0, -0.1));
        assert_abs_diff_eq!(diff_z(&left, &right).unwrap().diff_z, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn diff_excludes_masked_outlier() {
        let ext = FaceExtent { x_min: -5.0, x_max: 5.0, z_min: -5.0, z_max: 5.0 };
        let rest = vec![
            Vector2::new(-2.0, 0.0),
            Vector2::new(0.0, 0.0),
            Vector2::new(2.0, 0.0),
            Vector2::new(0.0, 2.0),
        ];
        let g = DotGrid::new(rest, 0.3, ext).unwrap();
        let disp = [
            Vector2::new(0.0, 0.1),
            Vector2::new(0.0, 0.2),
            Vector2::new(0.0, 0.3),
            Vector2::new(0.0, 9.9),
        ];
        let left = DotField::from_displacements(g.clone(), &disp, vec![true, true, true, false]);
        let right = DotField::at_rest(g);
        assert_abs_diff_eq!(diff_z(&left, &right).unwrap().diff_z, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn snapshot_zeroes_field() {
        let g = grid();
        let f = field_from(&g, |x, z| (0.01 * x, -0.02 * z + 0.1));
        let reference = snapshot_reference(&f);
        let again = DotField { grid: reference.clone(), current: f.current.clone(), valid: f.valid.clone() };
        for i in 0..again.current.len() {
            assert_eq!(again.displacement(i), Vector2::zeros());
        }
        let u = Vector2::new(0.05, -0.03);
        let moved = DotField {
            grid: reference.clone(),
            current: f.current.iter().map(|c| c + u).collect(),
            valid: f.valid.clone(),
        };
        for i in 0..moved.current.len() {
            assert_abs_diff_eq!(moved.displacement(i), u, epsilon = 1e-12);
        }
    }

    #[test]
    fn residual_reference_reads_negated_field() {
        // Reference captured while a gravity-induced field g is present; once
        // the object is stable the dots return to their unloaded positions,
        // which read as -g against that reference.
        let g = grid();
        let gravity = |x: f64, z: f64| Vector2::new(0.004 * z, -0.004 * x + 0.02);
        let loaded = DotField {
            grid: g.clone(),
            current: g.rest.iter().map(|p| p + gravity(p.x, p.y)).collect(),
            valid: vec![true; g.len()],
        };
        let reference = snapshot_reference(&loaded);
        let unloaded = DotField { grid: reference, current: g.rest.clone(), valid: vec![true; g.len()] };
        for (i, p) in g.rest.iter().enumerate() {
            assert_abs_diff_eq!(unloaded.displacement(i), -gravity(p.x, p.y), epsilon = 1e-12);
        }
        // Against the displaced reference the field is affine with gradient
        // -A (I + A)^-1, A the rotation part of g: curl = 2w / (1 + w^2).
        let w = 0.004;
        assert_abs_diff_eq!(curl_mean(&unloaded).unwrap(), 2.0 * w / (1.0 + w * w), epsilon = 1e-12);
    }

    #[test]
    fn matching_examples() {
        let g = grid();
        let f = match_dots(&g, &g.rest).unwrap();
        assert!(f.valid.iter().all(|v| *v));
        assert!((0..g.len()).all(|i| f.displacement(i) == Vector2::zeros()));

        let shift = Vector2::new(0.2, 0.1);
        let obs: Vec<_> = g.rest.iter().map(|p| p + shift).collect();
        let f = match_dots(&g, &obs).unwrap();
        for i in 0..g.len() {
            assert_abs_diff_eq!(f.displacement(i), shift, epsilon = 1e-12);
        }
    }

    #[test]
    fn matching_masks_deleted_points() {
        let g = grid();
        let shift = Vector2::new(0.1, -0.15);
        let deleted: Vec<usize> = (0..g.len()).filter(|i| i % 10 == 3).collect();
        let obs: Vec<_> = (0..g.len())
            .filter(|i| !deleted.contains(i))
            .map(|i| g.rest[i] + shift)
            .collect();
        let f = match_dots(&g, &obs).unwrap();
        let masked: Vec<usize> = (0..g.len()).filter(|&i| !f.valid[i]).collect();
        assert_eq!(masked, deleted);
        for i in (0..g.len()).filter(|&i| f.valid[i]) {
            assert_abs_diff_eq!(f.displacement(i), shift, epsilon = 1e-12);
        }
    }

    #[test]
    fn matching_too_few_is_degenerate() {
        let g = grid();
        let obs = vec![g.rest[0], g.rest[1], g.rest[2]];
        assert!(matches!(match_dots(&g, &obs), Err(Error::MatchingDegenerate { matched: 3 })));
    }

    #[test]
    fn csv_dump_has_one_row_per_dot() {
        let f = DotField::at_rest(grid());
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 63);
        assert!(text.starts_with("dot_id,x_rest,z_rest,dx,dz,valid"));
    }
}
