//! Rubber-sheet unwrapping of the iris annulus and occlusion masks.
//!
//! Column `j` samples the ray from the pupil center at angle
//! `2π (j + 0.5) / cols`, measured counterclockwise on screen from the
//! 3 o'clock direction (image `y` grows downward, so the ray direction is
//! `(cos θ, -sin θ)`). Row `i` sits at fraction `(i + 0.5) / rows` between the
//! pupil boundary and the point where the ray meets the limbus.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::{EyeImage, IrisSegmentation, NormalizedIris, OcclusionMask};

/// Source-image coordinates of every normalized cell, row-major.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    rows: usize,
    cols: usize,
    points: Vec<(f64, f64)>,
}

impl SampleGrid {
    pub fn new(seg: &IrisSegmentation, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg(format!(
                "unwrap needs rows >= 1 and cols >= 1, got {rows}x{cols}"
            )));
        }
        seg.validate()?;

        // Per column: inner anchor and the inner->outer displacement.
        let mut spokes = Vec::with_capacity(cols);
        for j in 0..cols {
            let theta = TAU * (j as f64 + 0.5) / cols as f64;
            let (dx, dy) = (theta.cos(), -theta.sin());
            let outer_t = limbus_distance(seg, dx, dy).ok_or_else(|| {
                Error::InvalidSegmentation(format!(
                    "ray at column {j} does not reach the limbus beyond the pupil"
                ))
            })?;
            let inner = (
                seg.pupil_x + seg.pupil_radius * dx,
                seg.pupil_y + seg.pupil_radius * dy,
            );
            let span = outer_t - seg.pupil_radius;
            spokes.push((inner, (span * dx, span * dy)));
        }

        let mut points = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let r = (i as f64 + 0.5) / rows as f64;
            points.extend(
                spokes
                    .iter()
                    .map(|&((ix, iy), (sx, sy))| (ix + r * sx, iy + r * sy)),
            );
        }
        Ok(Self { rows, cols, points })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn point(&self, row: usize, col: usize) -> (f64, f64) {
        self.points[row * self.cols + col]
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Distance along the unit ray `(dx, dy)` from the pupil center to the limbus
/// circle, if it lies beyond the pupil boundary.
fn limbus_distance(seg: &IrisSegmentation, dx: f64, dy: f64) -> Option<f64> {
    // |p + t d - c|^2 = R^2  =>  t^2 + 2 b t + (|p - c|^2 - R^2) = 0
    let (ox, oy) = (seg.pupil_x - seg.iris_x, seg.pupil_y - seg.iris_y);
    let b = ox * dx + oy * dy;
    let c = ox * ox + oy * oy - seg.iris_radius * seg.iris_radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b + disc.sqrt();
    (t > seg.pupil_radius).then_some(t)
}

/// Bilinear sample at `(x, y)`, or `None` when a neighbour would fall outside
/// the image.
#[inline]
fn bilinear(eye: &EyeImage, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (eye.width(), eye.height());
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return None;
    }
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let p = |xx: usize, yy: usize| f64::from(eye.pixel(xx, yy));
    let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
    let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Unwraps the iris annulus of `eye` into a `rows x cols` polar grid.
///
/// Cells whose sample point falls outside the image are masked with
/// intensity 0.
pub fn unwrap(
    eye: &EyeImage,
    seg: &IrisSegmentation,
    rows: usize,
    cols: usize,
) -> Result<NormalizedIris> {
    let grid = SampleGrid::new(seg, rows, cols)?;
    let mut intensities = Vec::with_capacity(rows * cols);
    let mut mask = Vec::with_capacity(rows * cols);
    for &(x, y) in grid.points() {
        match bilinear(eye, x, y) {
            Some(v) => {
                intensities.push(v / 255.0);
                mask.push(true);
            }
            None => {
                intensities.push(0.0);
                mask.push(false);
            }
        }
    }
    NormalizedIris::new(
        eye.image_id.clone(),
        eye.subject_id.clone(),
        rows,
        cols,
        intensities,
        mask,
    )
}

/// Flags cells whose nearest source pixel is at or above `threshold`, then
/// dilates the flagged set by `dilation` cells (square neighbourhood, clipped
/// radially, wrapped angularly). Returns the validity mask.
pub fn specular_mask_heuristic(
    eye: &EyeImage,
    seg: &IrisSegmentation,
    normalized: &NormalizedIris,
    threshold: u8,
    dilation: usize,
) -> Result<OcclusionMask> {
    let (rows, cols) = normalized.dims();
    let grid = SampleGrid::new(seg, rows, cols)?;
    let (w, h) = (eye.width() as f64, eye.height() as f64);

    let mut seeds = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let (x, y) = grid.point(i, j);
            let (nx, ny) = (x.round(), y.round());
            if nx < 0.0 || ny < 0.0 || nx >= w || ny >= h {
                continue;
            }
            if eye.pixel(nx as usize, ny as usize) >= threshold {
                seeds.push((i, j));
            }
        }
    }

    let mut mask = OcclusionMask::all_valid(rows, cols);
    let reach = dilation.min(cols / 2) as isize;
    for (i, j) in seeds {
        let lo = i.saturating_sub(dilation);
        let hi = (i + dilation).min(rows - 1);
        for r in lo..=hi {
            for dc in -reach..=reach {
                let c = (j as isize + dc).rem_euclid(cols as isize) as usize;
                mask.set(r, c, false);
            }
        }
    }
    Ok(mask)
}

/// Intersects the iris's own mask with any supplied masks.
pub fn attach_mask(
    nir: &NormalizedIris,
    external: Option<&OcclusionMask>,
    heuristic: Option<&OcclusionMask>,
) -> Result<NormalizedIris> {
    let mut out = nir.clone();
    for m in [external, heuristic].into_iter().flatten() {
        if (m.rows(), m.cols()) != nir.dims() {
            return Err(Error::arg(format!(
                "mask is {}x{} but iris {} is {}x{}",
                m.rows(),
                m.cols(),
                nir.image_id,
                nir.rows(),
                nir.cols()
            )));
        }
        for (dst, &src) in out.mask_mut().iter_mut().zip(m.as_slice()) {
            *dst &= src;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EyeSide;

    fn constant_eye(v: u8) -> EyeImage {
        EyeImage::new("e", "s", EyeSide::Left, 64, 48, vec![v; 64 * 48]).unwrap()
    }

    #[test]
    fn constant_image_unwraps_to_constant() {
        let eye = constant_eye(100);
        let seg = IrisSegmentation {
            pupil_x: 31.0,
            pupil_y: 24.5,
            pupil_radius: 5.0,
            iris_x: 32.0,
            iris_y: 24.0,
            iris_radius: 20.0,
        };
        let nir = unwrap(&eye, &seg, 16, 96).unwrap();
        assert_eq!(nir.dims(), (16, 96));
        assert!(nir.mask().iter().all(|&m| m));
        for &v in nir.intensities() {
            assert!((v - 100.0 / 255.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dims_are_argument_errors() {
        let eye = constant_eye(1);
        let seg = IrisSegmentation::concentric(32.0, 24.0, 4.0, 12.0);
        assert!(matches!(unwrap(&eye, &seg, 0, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(unwrap(&eye, &seg, 8, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bad_geometry_is_segmentation_error() {
        let eye = constant_eye(1);
        let seg = IrisSegmentation {
            pupil_x: 40.0,
            ..IrisSegmentation::concentric(32.0, 24.0, 6.0, 12.0)
        };
        assert!(matches!(
            unwrap(&eye, &seg, 4, 8),
            Err(Error::InvalidSegmentation(_))
        ));
    }

    #[test]
    fn out_of_bounds_samples_are_masked() {
        let eye = constant_eye(7);
        // Iris circle hangs off the left edge.
        let seg = IrisSegmentation::concentric(6.0, 24.0, 3.0, 15.0);
        let nir = unwrap(&eye, &seg, 8, 64).unwrap();
        let invalid = nir.mask().iter().filter(|&&m| !m).count();
        assert!(invalid > 0);
        for (v, m) in nir.intensities().iter().zip(nir.mask()) {
            if *m {
                assert!((v - 7.0 / 255.0).abs() < 1e-15);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
        // The 3 o'clock side stays inside the image.
        assert!(nir.is_valid(7, 0));
        assert!(nir.is_valid(7, 63));
        // 9 o'clock, outer rows, lies past x = 0.
        assert!(!nir.is_valid(7, 32));
    }

    #[test]
    fn column_zero_starts_just_past_three_oclock_going_counterclockwise() {
        let seg = IrisSegmentation::concentric(50.0, 50.0, 10.0, 30.0);
        let grid = SampleGrid::new(&seg, 4, 8).unwrap();
        let (x, y) = grid.point(0, 0);
        assert!(x > 50.0 && y < 50.0, "({x}, {y}) should be right of and above center");
        // Quarter turn later is the 12 o'clock side.
        let (x, y) = grid.point(0, 2);
        assert!(x < 50.0 && y < 50.0);
        let (_, y) = grid.point(0, 4);
        assert!(y > 50.0);
    }

    #[test]
    fn no_bright_pixels_gives_all_valid_mask() {
        let eye = constant_eye(249);
        let seg = IrisSegmentation::concentric(32.0, 24.0, 4.0, 18.0);
        let nir = unwrap(&eye, &seg, 8, 32).unwrap();
        let m = specular_mask_heuristic(&eye, &seg, &nir, 250, 2).unwrap();
        assert_eq!(m.count_valid(), 8 * 32);
    }

    fn invalid_cells(m: &OcclusionMask) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if !m.get(r, c) {
                    out.push((r, c));
                }
            }
        }
        out
    }

    /// Saturates the source pixel nearest to cell `(row, col)` of a coarse grid,
    /// where no two cells share a nearest pixel.
    fn saturated_at(row: usize, col: usize, rows: usize, cols: usize) -> (EyeImage, IrisSegmentation) {
        let seg = IrisSegmentation::concentric(100.0, 100.0, 20.0, 90.0);
        let grid = SampleGrid::new(&seg, rows, cols).unwrap();
        let (x, y) = grid.point(row, col);
        let (px, py) = (x.round() as usize, y.round() as usize);
        let eye = EyeImage::from_fn("e", "s", 201, 201, |xx, yy| {
            if (xx, yy) == (px, py) {
                255
            } else {
                90
            }
        })
        .unwrap();
        (eye, seg)
    }

    #[test]
    fn single_saturated_pixel_dilates_to_five_by_five() {
        let (rows, cols) = (12, 24);
        let (eye, seg) = saturated_at(5, 10, rows, cols);
        let nir = unwrap(&eye, &seg, rows, cols).unwrap();
        let m = specular_mask_heuristic(&eye, &seg, &nir, 250, 2).unwrap();
        let expected: Vec<_> = (3..=7)
            .flat_map(|r| (8..=12).map(move |c| (r, c)))
            .collect();
        assert_eq!(invalid_cells(&m), expected);

        // Next to the pupil boundary the square is clipped radially.
        let (eye, seg) = saturated_at(0, 10, rows, cols);
        let m = specular_mask_heuristic(&eye, &seg, &nir, 250, 2).unwrap();
        assert_eq!(invalid_cells(&m).len(), 3 * 5);
    }

    #[test]
    fn dilation_wraps_across_the_seam() {
        let (rows, cols) = (12, 24);
        let (eye, seg) = saturated_at(6, cols - 1, rows, cols);
        let nir = unwrap(&eye, &seg, rows, cols).unwrap();
        let m = specular_mask_heuristic(&eye, &seg, &nir, 250, 2).unwrap();
        let cells = invalid_cells(&m);
        assert_eq!(cells.len(), 25);
        for r in 4..=8 {
            for c in [cols - 3, cols - 2, cols - 1, 0, 1] {
                assert!(cells.contains(&(r, c)), "missing ({r}, {c})");
            }
        }
    }

    #[test]
    fn attach_mask_is_pointwise_and() {
        let nir = NormalizedIris::new("a", "s", 10, 10, vec![0.2; 100], vec![true; 100]).unwrap();
        let valid = OcclusionMask::all_valid(10, 10);
        let invalid = OcclusionMask::all_invalid(10, 10);

        let out = attach_mask(&nir, Some(&valid), Some(&valid)).unwrap();
        assert_eq!(out.valid_count(), 100);
        let out = attach_mask(&nir, Some(&valid), Some(&invalid)).unwrap();
        assert_eq!(out.valid_count(), 0);
        assert_eq!(out.intensities(), nir.intensities());

        let mut a = OcclusionMask::all_valid(10, 10);
        a.set(3, 7, false);
        let mut b = OcclusionMask::all_valid(10, 10);
        b.set(9, 2, false);
        let out = attach_mask(&nir, Some(&a), Some(&b)).unwrap();
        assert_eq!(invalid_cells(&out.occlusion_mask()), vec![(3, 7), (9, 2)]);

        let wrong = OcclusionMask::all_valid(10, 9);
        assert!(matches!(
            attach_mask(&nir, Some(&wrong), None),
            Err(Error::InvalidArgument(_))
        ));
        assert_eq!(attach_mask(&nir, None, None).unwrap(), nir);
    }
}
