//! Deterministic synthetic normalized irises with analytically known
//! comparison behaviour.
//!
//! Image `i` draws its pixels from ChaCha stream `2i` and its occlusion mask
//! from stream `2i + 1` under `SynthSpec::seed`, so any image can be generated
//! alone, in any order, on any thread, with identical results.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::NormalizedIris;
use crate::preprocess::{median, TARGET_MEDIAN};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Amplitude {
    /// Independent uniform values on [0, 1).
    #[default]
    Uniform01,
    /// Normal values, clamped at 0.
    Gaussian { mu: f64, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub amplitude: Amplitude,
    /// Gaussian blur sigma in cells; 0 gives independent pixels.
    pub correlation_sigma: f64,
    pub occlusion_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            count: 300,
            rows: 32,
            cols: 240,
            amplitude: Amplitude::Uniform01,
            correlation_sigma: 0.0,
            occlusion_fraction: 0.0,
            seed: 42,
        }
    }
}

impl SynthSpec {
    /// Checks the settings and returns any non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.count < 2 {
            return Err(Error::arg(format!("synthetic set needs count >= 2, got {}", self.count)));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::arg("synthetic images need rows, cols >= 1"));
        }
        if !(self.correlation_sigma >= 0.0 && self.correlation_sigma.is_finite()) {
            return Err(Error::arg(format!(
                "correlation sigma must be >= 0, got {}",
                self.correlation_sigma
            )));
        }
        if !(0.0..1.0).contains(&self.occlusion_fraction) {
            return Err(Error::arg(format!(
                "occlusion fraction must be in [0, 1), got {}",
                self.occlusion_fraction
            )));
        }
        if let Amplitude::Gaussian { mu, sigma } = self.amplitude {
            if !(mu.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::arg(format!("bad gaussian amplitude ({mu}, {sigma})")));
            }
        }
        let mut warnings = Vec::new();
        let visible = 1.0 - self.occlusion_fraction;
        let expected_overlap = visible * visible * (self.rows * self.cols) as f64;
        if expected_overlap < 2.0 {
            warnings.push(format!(
                "occlusion fraction {} leaves {expected_overlap:.2} expected overlap cells per pair",
                self.occlusion_fraction
            ));
        }
        Ok(warnings)
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    fn stream(&self, index: usize, mask: bool) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * index as u64 + u64::from(mask));
        rng
    }
}

pub fn image_id(index: usize) -> String {
    format!("synth-{index:06}")
}

pub fn subject_id(index: usize) -> String {
    format!("subj-{index:06}")
}

fn draw_pixels(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = spec.pixel_count();
    match spec.amplitude {
        Amplitude::Uniform01 => (0..n).map(|_| rng.random::<f64>()).collect(),
        Amplitude::Gaussian { mu, sigma } => {
            let dist = Normal::new(mu, sigma).expect("validated sigma");
            (0..n).map(|_| dist.sample(rng).max(0.0)).collect()
        }
    }
}

/// Separable Gaussian blur, wrapping angularly (columns) and clamping
/// radially (rows).
pub fn gaussian_blur(values: &[f64], rows: usize, cols: usize, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);

    let mut tmp = vec![0.0; rows * cols];
    for r in 0..rows {
        let line = &values[r * cols..(r + 1) * cols];
        for c in 0..cols {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let cc = (c as isize + k as isize - radius).rem_euclid(cols as isize) as usize;
                acc += w * line[cc];
            }
            tmp[r * cols + c] = acc;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for (k, w) in kernel.iter().enumerate() {
            let rr = (r as isize + k as isize - radius).clamp(0, rows as isize - 1) as usize;
            let src = &tmp[rr * cols..(rr + 1) * cols];
            for (d, s) in out[r * cols..(r + 1) * cols].iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}

fn assemble(spec: &SynthSpec, index: usize, intensities: Vec<f64>) -> NormalizedIris {
    let mask = if spec.occlusion_fraction > 0.0 {
        occlusion_mask(spec, index)
    } else {
        vec![true; spec.pixel_count()]
    };
    NormalizedIris::new(
        image_id(index),
        subject_id(index),
        spec.rows,
        spec.cols,
        intensities,
        mask,
    )
    .expect("generator output satisfies the iris invariants")
}

/// One independently drawn image.
pub fn iid_image(spec: &SynthSpec, index: usize) -> NormalizedIris {
    let mut rng = spec.stream(index, false);
    let px = draw_pixels(spec, &mut rng);
    assemble(spec, index, px)
}

/// One blurred image, mapped affinely so its median is 127/255.
///
/// The gain is the largest that keeps every value inside [0, 1], a contrast
/// stretch into the 8-bit range. No clamping is needed, so no artificial ties
/// are introduced at the range ends.
pub fn correlated_image(spec: &SynthSpec, index: usize) -> NormalizedIris {
    let mut rng = spec.stream(index, false);
    let white = draw_pixels(spec, &mut rng);
    let mut px = gaussian_blur(&white, spec.rows, spec.cols, spec.correlation_sigma);
    let mut sorted = px.clone();
    let med = median(&mut sorted).expect("non-empty image");
    let (lo, hi) = sorted
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut gain = f64::INFINITY;
    if med > lo {
        gain = gain.min(TARGET_MEDIAN / (med - lo));
    }
    if hi > med {
        gain = gain.min((1.0 - TARGET_MEDIAN) / (hi - med));
    }
    if !gain.is_finite() {
        gain = 1.0;
    }
    px.iter_mut()
        .for_each(|v| *v = (TARGET_MEDIAN + gain * (*v - med)).clamp(0.0, 1.0));
    assemble(spec, index, px)
}

/// Independent-pixel set. Requires `correlation_sigma == 0`.
pub fn gen_iid(spec: &SynthSpec) -> Result<Vec<NormalizedIris>> {
    warn_all(spec.validate()?);
    if spec.correlation_sigma != 0.0 {
        return Err(Error::arg("gen_iid requires correlation_sigma = 0"));
    }
    Ok((0..spec.count)
        .into_par_iter()
        .map(|i| iid_image(spec, i))
        .collect())
}

/// Spatially correlated set. Requires `correlation_sigma > 0`.
pub fn gen_correlated(spec: &SynthSpec) -> Result<Vec<NormalizedIris>> {
    warn_all(spec.validate()?);
    if spec.correlation_sigma.is_nan() || spec.correlation_sigma <= 0.0 {
        return Err(Error::arg("gen_correlated requires correlation_sigma > 0"));
    }
    Ok((0..spec.count)
        .into_par_iter()
        .map(|i| correlated_image(spec, i))
        .collect())
}

/// Dispatches on `correlation_sigma`.
pub fn generate(spec: &SynthSpec) -> Result<Vec<NormalizedIris>> {
    if spec.correlation_sigma > 0.0 {
        gen_correlated(spec)
    } else {
        gen_iid(spec)
    }
}

fn warn_all(warnings: Vec<String>) {
    for w in warnings {
        log::warn!("{w}");
    }
}

/// Validity mask for image `index`: an eyelid-like band hanging from row 0
/// over a random angular arc, filled row by row until exactly
/// `ceil(occlusion_fraction * cells)` cells are invalid.
pub fn occlusion_mask(spec: &SynthSpec, index: usize) -> Vec<bool> {
    let (rows, cols) = (spec.rows, spec.cols);
    let cells = rows * cols;
    let mut mask = vec![true; cells];
    let target = (spec.occlusion_fraction * cells as f64).ceil() as usize;
    if target == 0 {
        return mask;
    }
    let mut rng = spec.stream(index, true);
    let min_arc = target.div_ceil(rows).max(cols / 4).clamp(1, cols);
    let arc = rng.random_range(min_arc..=cols);
    let start = rng.random_range(0..cols);
    let mut marked = 0;
    'fill: for r in 0..rows {
        for k in 0..arc {
            if marked == target {
                break 'fill;
            }
            mask[r * cols + (start + k) % cols] = false;
            marked += 1;
        }
    }
    mask
}

/// Applies synthetic occlusion masks to already generated images.
pub fn gen_occlusion(spec: &SynthSpec, images: &mut [NormalizedIris]) -> Result<()> {
    warn_all(spec.validate()?);
    for (i, img) in images.iter_mut().enumerate() {
        if img.dims() != (spec.rows, spec.cols) {
            return Err(Error::arg(format!(
                "image {} is {}x{}, spec is {}x{}",
                img.image_id,
                img.rows(),
                img.cols(),
                spec.rows,
                spec.cols
            )));
        }
        let m = occlusion_mask(spec, i);
        img.mask_mut()
            .iter_mut()
            .zip(m)
            .for_each(|(d, s)| *d &= s);
    }
    Ok(())
}
