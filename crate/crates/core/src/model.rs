//! Domain types: raw eye captures, their segmentation circles, and the
//! rectangular polar-unwrapped iris with its validity mask.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Radial samples in the full-resolution normalized format.
pub const BASE_ROWS: usize = 128;
/// Angular samples in the full-resolution normalized format.
pub const BASE_COLS: usize = 960;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EyeSide {
    Left,
    Right,
    #[default]
    Unknown,
}

impl FromStr for EyeSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(EyeSide::Left),
            "right" | "r" => Ok(EyeSide::Right),
            "unknown" | "" => Ok(EyeSide::Unknown),
            other => Err(Error::arg(format!("unknown eye side {other:?}"))),
        }
    }
}

impl fmt::Display for EyeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EyeSide::Left => "left",
            EyeSide::Right => "right",
            EyeSide::Unknown => "unknown",
        })
    }
}

/// An 8-bit grayscale eye capture, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EyeImage {
    pub image_id: String,
    pub subject_id: String,
    pub eye_side: EyeSide,
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl EyeImage {
    pub fn new(
        image_id: impl Into<String>,
        subject_id: impl Into<String>,
        eye_side: EyeSide,
        width: usize,
        height: usize,
        pixels: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg(format!(
                "eye image must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::arg(format!(
                "eye image {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            image_id: image_id.into(),
            subject_id: subject_id.into(),
            eye_side,
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        image_id: impl Into<String>,
        subject_id: impl Into<String>,
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(image_id, subject_id, EyeSide::Unknown, width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Pupil and limbus circles in source-image pixel coordinates.
///
/// Pixel `(x, y)` has its center at the integer coordinate `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrisSegmentation {
    pub pupil_x: f64,
    pub pupil_y: f64,
    pub pupil_radius: f64,
    pub iris_x: f64,
    pub iris_y: f64,
    pub iris_radius: f64,
}

impl IrisSegmentation {
    pub fn concentric(cx: f64, cy: f64, pupil_radius: f64, iris_radius: f64) -> Self {
        Self {
            pupil_x: cx,
            pupil_y: cy,
            pupil_radius,
            iris_x: cx,
            iris_y: cy,
            iris_radius,
        }
    }

    /// Checks that both radii are positive and the pupil circle sits strictly
    /// inside the iris circle.
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.pupil_x,
            self.pupil_y,
            self.pupil_radius,
            self.iris_x,
            self.iris_y,
            self.iris_radius,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSegmentation("non-finite circle parameter".into()));
        }
        if self.pupil_radius <= 0.0 || self.iris_radius <= 0.0 {
            return Err(Error::InvalidSegmentation(format!(
                "radii must be positive (pupil {}, iris {})",
                self.pupil_radius, self.iris_radius
            )));
        }
        if self.pupil_radius >= self.iris_radius {
            return Err(Error::InvalidSegmentation(format!(
                "pupil radius {} must be less than iris radius {}",
                self.pupil_radius, self.iris_radius
            )));
        }
        let offset = (self.pupil_x - self.iris_x).hypot(self.pupil_y - self.iris_y);
        if offset + self.pupil_radius >= self.iris_radius {
            return Err(Error::InvalidSegmentation(format!(
                "pupil circle (offset {offset:.3}, radius {}) not inside iris circle (radius {})",
                self.pupil_radius, self.iris_radius
            )));
        }
        Ok(())
    }
}

/// Boolean validity grid aligned with a [`NormalizedIris`]; `true` marks a
/// usable iris cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcclusionMask {
    rows: usize,
    cols: usize,
    valid: Vec<bool>,
}

impl OcclusionMask {
    pub fn all_valid(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            valid: vec![true; rows * cols],
        }
    }

    pub fn all_invalid(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            valid: vec![false; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, valid: Vec<bool>) -> Result<Self> {
        if valid.len() != rows * cols {
            return Err(Error::arg(format!(
                "mask {rows}x{cols} needs {} cells, got {}",
                rows * cols,
                valid.len()
            )));
        }
        Ok(Self { rows, cols, valid })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, valid: bool) {
        self.valid[row * self.cols + col] = valid;
    }

    pub fn count_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.valid
    }
}

/// Rubber-sheet normalized iris.
///
/// Row 0 lies on the pupil boundary and the last row on the limbus. Columns
/// are angularly periodic: column 0 and the last column are neighbours.
/// Intensities are unit scale (8-bit `v` maps to `v / 255`) and may exceed
/// 1.0 after intensity normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedIris {
    pub image_id: String,
    pub subject_id: String,
    rows: usize,
    cols: usize,
    intensities: Vec<f64>,
    mask: Vec<bool>,
    /// Resolution fraction relative to the full 128x960 format.
    pub scale: f64,
    /// Multiplicative intensity factor already applied (1.0 if none).
    pub intensity_scale: f64,
}

impl NormalizedIris {
    pub fn new(
        image_id: impl Into<String>,
        subject_id: impl Into<String>,
        rows: usize,
        cols: usize,
        intensities: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg(format!(
                "normalized iris must be at least 1x1, got {rows}x{cols}"
            )));
        }
        let cells = rows * cols;
        if intensities.len() != cells || mask.len() != cells {
            return Err(Error::arg(format!(
                "normalized iris {rows}x{cols} needs {cells} cells, got {} intensities and {} mask entries",
                intensities.len(),
                mask.len()
            )));
        }
        if let Some(bad) = intensities.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::arg(format!(
                "intensity at cell {bad} is {} (must be finite and >= 0)",
                intensities[bad]
            )));
        }
        Ok(Self {
            image_id: image_id.into(),
            subject_id: subject_id.into(),
            rows,
            cols,
            intensities,
            mask,
            scale: 1.0,
            intensity_scale: 1.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_intensity_scale(mut self, intensity_scale: f64) -> Self {
        self.intensity_scale = intensity_scale;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn intensity(&self, row: usize, col: usize) -> f64 {
        self.intensities[row * self.cols + col]
    }

    #[inline]
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.cols + col]
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&v| v).count()
    }

    pub fn occlusion_mask(&self) -> OcclusionMask {
        OcclusionMask {
            rows: self.rows,
            cols: self.cols,
            valid: self.mask.clone(),
        }
    }

    /// Intensities of unmasked cells, in grid order.
    pub fn valid_intensities(&self) -> impl Iterator<Item = f64> + '_ {
        self.intensities
            .iter()
            .zip(&self.mask)
            .filter_map(|(&v, &m)| m.then_some(v))
    }

    pub(crate) fn intensities_mut(&mut self) -> &mut [f64] {
        &mut self.intensities
    }

    pub(crate) fn mask_mut(&mut self) -> &mut [bool] {
        &mut self.mask
    }
}
