//! Image selection, median intensity normalization, and resolution reduction.

use crate::error::{Error, Result};
use crate::model::{IrisSegmentation, NormalizedIris, BASE_COLS, BASE_ROWS};

/// The standard reduced resolutions plus full resolution, descending.
pub const STANDARD_SCALES: [f64; 8] = [1.0, 0.8, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05];

/// Normalized median intensity target, 127 on the 8-bit scale.
pub const TARGET_MEDIAN: f64 = 127.0 / 255.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionCriteria {
    /// Minimum median of unmasked intensities on the 0-255 scale (inclusive).
    pub min_median_intensity: f64,
    /// Maximum pupil radius in source pixels (inclusive).
    pub max_pupil_radius: f64,
}

impl Default for SelectionCriteria {
    fn default() -> Self {
        Self {
            min_median_intensity: 70.0,
            max_pupil_radius: 52.0,
        }
    }
}

impl SelectionCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=255.0).contains(&self.min_median_intensity) {
            return Err(Error::arg(format!(
                "min median intensity {} outside [0, 255]",
                self.min_median_intensity
            )));
        }
        if self.max_pupil_radius.is_nan() || self.max_pupil_radius <= 0.0 {
            return Err(Error::arg(format!(
                "max pupil radius must be positive, got {}",
                self.max_pupil_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    NoValidPixels,
    DimMedian { median: f64 },
    LargePupil { radius: f64 },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::NoValidPixels => f.write_str("no valid pixels"),
            RejectReason::DimMedian { median } => write!(f, "median intensity {median:.1}"),
            RejectReason::LargePupil { radius } => write!(f, "pupil radius {radius}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub image_id: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default)]
pub struct Selection {
    pub accepted: Vec<(NormalizedIris, IrisSegmentation)>,
    pub rejected: Vec<Rejection>,
}

/// Median with the even-count convention of averaging the central pair.
pub fn median(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Some(upper)
    } else {
        let lower_max = lower.iter().copied().max_by(f64::total_cmp)?;
        Some(0.5 * (lower_max + upper))
    }
}

pub fn valid_median(nir: &NormalizedIris) -> Option<f64> {
    let mut v: Vec<f64> = nir.valid_intensities().collect();
    median(&mut v)
}

/// Keeps items bright enough and with a small enough pupil, in input order.
pub fn select_images(
    items: Vec<(NormalizedIris, IrisSegmentation)>,
    criteria: &SelectionCriteria,
) -> Selection {
    let mut out = Selection::default();
    for (nir, seg) in items {
        let reason = match valid_median(&nir) {
            None => Some(RejectReason::NoValidPixels),
            Some(m) => {
                let median = m * 255.0;
                // Unit-scale medians of 8-bit data sit on a 0.5/255 lattice;
                // the slack only absorbs the round trip through v / 255.
                if median + 1e-9 < criteria.min_median_intensity {
                    Some(RejectReason::DimMedian { median })
                } else if seg.pupil_radius > criteria.max_pupil_radius {
                    Some(RejectReason::LargePupil {
                        radius: seg.pupil_radius,
                    })
                } else {
                    None
                }
            }
        };
        match reason {
            None => out.accepted.push((nir, seg)),
            Some(reason) => {
                log::debug!("rejecting {}: {reason:?}", nir.image_id);
                out.rejected.push(Rejection {
                    image_id: nir.image_id.clone(),
                    reason,
                });
            }
        }
    }
    out
}

/// Scales unmasked intensities so their median becomes `target_median`.
///
/// Masked cells are set to `target_median`. No clamping is applied, so
/// bright cells may exceed 1.0.
pub fn normalize_intensity(nir: &NormalizedIris, target_median: f64) -> Result<NormalizedIris> {
    if !(target_median > 0.0 && target_median.is_finite()) {
        return Err(Error::arg(format!(
            "target median must be positive, got {target_median}"
        )));
    }
    let m = valid_median(nir).ok_or_else(|| {
        Error::DegenerateImage(format!("{} has no unmasked pixels", nir.image_id))
    })?;
    if m <= 0.0 {
        return Err(Error::DegenerateImage(format!(
            "{} has zero median intensity",
            nir.image_id
        )));
    }
    let factor = target_median / m;
    let mut out = nir.clone();
    let mask = nir.mask();
    for (v, &valid) in out.intensities_mut().iter_mut().zip(mask) {
        *v = if valid { *v * factor } else { target_median };
    }
    out.intensity_scale = nir.intensity_scale * factor;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionLevel {
    pub scale: f64,
    pub rows: usize,
    pub cols: usize,
}

impl ResolutionLevel {
    pub fn new(scale: f64, base_rows: usize, base_cols: usize) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self {
            scale,
            rows: scaled_dim(scale, base_rows),
            cols: scaled_dim(scale, base_cols),
        })
    }

    /// Level relative to the full 128x960 format.
    pub fn standard(scale: f64) -> Result<Self> {
        Self::new(scale, BASE_ROWS, BASE_COLS)
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::arg(format!("scale must be in (0, 1], got {scale}")));
    }
    Ok(())
}

/// `ceil(scale * n)`, treating products within 1e-9 of an integer as exact so
/// that binary rounding of e.g. 0.1 * 960 cannot bump the size.
pub fn scaled_dim(scale: f64, n: usize) -> usize {
    let v = scale * n as f64;
    let r = v.round();
    let d = if (v - r).abs() < 1e-9 { r } else { v.ceil() };
    (d as usize).max(1)
}

/// Keys cubic convolution kernel with `a = -0.5`.
#[inline]
pub fn keys_cubic(x: f64) -> f64 {
    let ax = x.abs();
    let ax2 = ax * ax;
    let ax3 = ax2 * ax;
    if ax <= 1.0 {
        1.5 * ax3 - 2.5 * ax2 + 1.0
    } else if ax <= 2.0 {
        -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    /// Half-sample symmetric reflection.
    Mirror,
    Periodic,
}

/// Per-output-sample source taps `(index, weight)`, weights summing to 1.
fn contributions(n_in: usize, n_out: usize, scale: f64, edge: Edge) -> Vec<Vec<(usize, f64)>> {
    let (width, kscale) = if scale < 1.0 {
        (4.0 / scale, scale)
    } else {
        (4.0, 1.0)
    };
    let taps = width.ceil() as i64 + 2;
    let period = 2 * n_in as i64;
    (0..n_out)
        .map(|x| {
            let u = (x as f64 + 0.5) / scale - 0.5;
            let left = (u - width / 2.0).floor() as i64;
            let mut w: Vec<(usize, f64)> = Vec::with_capacity(taps as usize);
            let mut total = 0.0;
            for k in 0..taps {
                let idx = left + k;
                let weight = kscale * keys_cubic(kscale * (u - idx as f64));
                if weight == 0.0 {
                    continue;
                }
                let src = match edge {
                    Edge::Periodic => idx.rem_euclid(n_in as i64),
                    Edge::Mirror => {
                        let m = idx.rem_euclid(period);
                        if m < n_in as i64 {
                            m
                        } else {
                            period - 1 - m
                        }
                    }
                };
                total += weight;
                w.push((src as usize, weight));
            }
            for t in &mut w {
                t.1 /= total;
            }
            w
        })
        .collect()
}

fn resample(
    src: &[f64],
    rows: usize,
    cols: usize,
    row_taps: &[Vec<(usize, f64)>],
    col_taps: &[Vec<(usize, f64)>],
) -> Vec<f64> {
    let out_rows = row_taps.len();
    let out_cols = col_taps.len();
    // Radial pass.
    let mut mid = vec![0.0; out_rows * cols];
    for (r, taps) in row_taps.iter().enumerate() {
        let dst = &mut mid[r * cols..(r + 1) * cols];
        for &(sr, w) in taps {
            let line = &src[sr * cols..(sr + 1) * cols];
            for (d, &s) in dst.iter_mut().zip(line) {
                *d += w * s;
            }
        }
    }
    // Angular pass.
    let mut out = vec![0.0; out_rows * out_cols];
    for r in 0..out_rows {
        let line = &mid[r * cols..(r + 1) * cols];
        for (c, taps) in col_taps.iter().enumerate() {
            out[r * out_cols + c] = taps.iter().map(|&(sc, w)| w * line[sc]).sum();
        }
    }
    debug_assert_eq!(rows * cols, src.len());
    out
}

/// Reduces resolution by `scale` in both directions with an antialiased
/// cubic filter.
///
/// Output dims are `ceil(scale * rows) x ceil(scale * cols)`. Masked cells are
/// filled with the median of the unmasked cells before filtering; the mask is
/// filtered as a coverage field and an output cell is valid iff its coverage
/// reaches 0.5. The angular axis wraps, the radial axis reflects.
pub fn downscale(nir: &NormalizedIris, scale: f64) -> Result<NormalizedIris> {
    check_scale(scale)?;
    let (rows, cols) = nir.dims();
    let out_rows = scaled_dim(scale, rows);
    let out_cols = scaled_dim(scale, cols);

    let fill = valid_median(nir).unwrap_or(0.0);
    let filled: Vec<f64> = nir
        .intensities()
        .iter()
        .zip(nir.mask())
        .map(|(&v, &m)| if m { v } else { fill })
        .collect();
    let coverage: Vec<f64> = nir.mask().iter().map(|&m| f64::from(u8::from(m))).collect();

    let row_taps = contributions(rows, out_rows, scale, Edge::Mirror);
    let col_taps = contributions(cols, out_cols, scale, Edge::Periodic);

    let intensities: Vec<f64> = resample(&filled, rows, cols, &row_taps, &col_taps)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let mask: Vec<bool> = resample(&coverage, rows, cols, &row_taps, &col_taps)
        .into_iter()
        .map(|c| c >= 0.5)
        .collect();

    Ok(NormalizedIris::new(
        nir.image_id.clone(),
        nir.subject_id.clone(),
        out_rows,
        out_cols,
        intensities,
        mask,
    )?
    .with_scale(nir.scale * scale)
    .with_intensity_scale(nir.intensity_scale))
}
