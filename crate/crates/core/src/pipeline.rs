//! End-to-end experiment driver: manifest ingestion, normalization,
//! resolution pyramid, all-pairs comparison, and the sweep table.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::compare::{all_pairs, CompareConfig};
use crate::error::{Error, Result};
use crate::io::emit::{emit_results, parse_moments_csv, EmittedFiles, LevelPairs, MomentsRow};
use crate::io::manifest::DatasetManifest;
use crate::io::nir::{load_nir, save_nir};
use crate::io::pnm::{read_pbm_mask, read_pgm};
use crate::model::{IrisSegmentation, NormalizedIris, BASE_COLS, BASE_ROWS};
use crate::normalize::{attach_mask, specular_mask_heuristic, unwrap};
use crate::preprocess::{
    downscale, normalize_intensity, select_images, RejectReason, Rejection, ResolutionLevel,
    SelectionCriteria, STANDARD_SCALES, TARGET_MEDIAN,
};
use crate::stats::{estimate_dof, sweep_table, HistogramSpec, SweepTable};

/// Reference `(scale, mean, std, dof)` rows for a 1382-image set on the
/// 128x960 grid.
pub const REFERENCE_TABLE_CSV: &str = include_str!("../data/table1.csv");

/// The reference table, parsed.
pub fn reference_table() -> Vec<MomentsRow> {
    parse_moments_csv(REFERENCE_TABLE_CSV.as_bytes(), Path::new("table1.csv"))
        .expect("bundled table parses")
}

/// Degrees of freedom for each `(mean, std)` row. Any degenerate row fails
/// the whole check.
pub fn check_moments(rows: &[MomentsRow]) -> Result<Vec<(MomentsRow, f64, u64)>> {
    rows.iter()
        .map(|m| {
            let (real, dof) = estimate_dof(m.mean, m.std)?;
            Ok((m.clone(), real, dof))
        })
        .collect()
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = one per core).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::arg(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeOptions {
    pub rows: usize,
    pub cols: usize,
    /// Source intensity at or above which a cell counts as a highlight.
    pub specular_threshold: u8,
    pub specular_dilation: usize,
    pub target_median: f64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self {
            rows: BASE_ROWS,
            cols: BASE_COLS,
            specular_threshold: 250,
            specular_dilation: 2,
            target_median: TARGET_MEDIAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub criteria: SelectionCriteria,
    pub compare: CompareConfig,
    pub normalize: NormalizeOptions,
    pub histogram: HistogramSpec,
    pub scales: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            criteria: SelectionCriteria::default(),
            compare: CompareConfig::default(),
            normalize: NormalizeOptions::default(),
            histogram: HistogramSpec::default(),
            scales: STANDARD_SCALES.to_vec(),
            output_dir: PathBuf::from("."),
            seed: 42,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.criteria.validate()?;
        self.compare.validate()?;
        validate_scales(&self.scales)
    }
}

pub fn validate_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::arg("at least one scale is required"));
    }
    if let Some(bad) = scales.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
        return Err(Error::arg(format!("scale {bad} outside (0, 1]")));
    }
    if scales.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::arg(
            "scales must be strictly descending without duplicates",
        ));
    }
    Ok(())
}

/// Normalized irises that passed selection, plus the ones that did not.
#[derive(Debug, Clone, Default)]
pub struct NormalizedDataset {
    pub irises: Vec<NormalizedIris>,
    pub rejected: Vec<Rejection>,
}

fn unwrap_entry(
    entry: &crate::io::manifest::ManifestEntry,
    opts: &NormalizeOptions,
) -> Result<(NormalizedIris, IrisSegmentation)> {
    let eye = read_pgm(
        &entry.image_path,
        &entry.image_id,
        &entry.subject_id,
        entry.eye_side,
    )?;
    let seg = entry.segmentation;
    let nir = unwrap(&eye, &seg, opts.rows, opts.cols)?;
    let highlights = specular_mask_heuristic(
        &eye,
        &seg,
        &nir,
        opts.specular_threshold,
        opts.specular_dilation,
    )?;
    let external = entry.mask_path.as_ref().map(read_pbm_mask).transpose()?;
    Ok((attach_mask(&nir, external.as_ref(), Some(&highlights))?, seg))
}

/// Unwraps, masks, selects, and intensity-normalizes every manifest entry.
pub fn normalize_dataset(
    manifest: &DatasetManifest,
    criteria: &SelectionCriteria,
    opts: &NormalizeOptions,
) -> Result<NormalizedDataset> {
    criteria.validate()?;
    let unwrapped: Vec<(NormalizedIris, IrisSegmentation)> = manifest
        .entries
        .par_iter()
        .map(|e| unwrap_entry(e, opts))
        .collect::<Result<_>>()?;
    let selection = select_images(unwrapped, criteria);
    let mut out = NormalizedDataset {
        irises: Vec::with_capacity(selection.accepted.len()),
        rejected: selection.rejected,
    };
    for (nir, _) in selection.accepted {
        match normalize_intensity(&nir, opts.target_median) {
            Ok(n) => out.irises.push(n),
            Err(Error::DegenerateImage(msg)) => {
                log::warn!("{msg}");
                out.rejected.push(Rejection {
                    image_id: nir.image_id.clone(),
                    reason: RejectReason::NoValidPixels,
                });
            }
            Err(e) => return Err(e),
        }
    }
    log::info!(
        "{} of {} images selected",
        out.irises.len(),
        manifest.entries.len()
    );
    Ok(out)
}

/// Writes `image_id,status,reason` for every accepted and rejected image.
pub fn write_selection_csv(set: &NormalizedDataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["image_id", "status", "reason"])?;
    for img in &set.irises {
        w.write_record([img.image_id.as_str(), "accepted", ""])?;
    }
    for r in &set.rejected {
        w.write_record([r.image_id.as_str(), "rejected", &r.reason.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One downscaled copy of the set per scale, in the given order.
pub fn build_pyramid(
    images: &[NormalizedIris],
    scales: &[f64],
) -> Result<Vec<(ResolutionLevel, Vec<NormalizedIris>)>> {
    validate_scales(scales)?;
    let first = images
        .first()
        .ok_or_else(|| Error::arg("pyramid needs at least one image"))?;
    let (rows, cols) = first.dims();
    scales
        .iter()
        .map(|&s| {
            let level = ResolutionLevel::new(s, rows, cols)?;
            let set = images
                .par_iter()
                .map(|img| downscale(img, s))
                .collect::<Result<Vec<_>>>()?;
            Ok((level, set))
        })
        .collect()
}

/// All-pairs comparison at every level.
pub fn compare_levels(
    pyramid: &[(ResolutionLevel, Vec<NormalizedIris>)],
    cfg: &CompareConfig,
) -> Result<Vec<LevelPairs>> {
    pyramid
        .iter()
        .map(|(level, set)| {
            let out = all_pairs(set, cfg)?;
            log::info!(
                "scale {}: {} pairs ({} same-subject excluded, {} below min overlap)",
                level.scale,
                out.pairs.len(),
                out.same_subject_excluded,
                out.below_min_overlap
            );
            Ok(LevelPairs {
                level: *level,
                pairs: out.pairs,
            })
        })
        .collect()
}

pub fn table_for(levels: &[LevelPairs]) -> Result<SweepTable> {
    let input: Vec<_> = levels.iter().map(|l| (l.level, l.pairs.clone())).collect();
    let table = sweep_table(&input)?;
    for d in &table.diagnostics {
        log::warn!("{d}");
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub levels: Vec<LevelPairs>,
    pub table: SweepTable,
}

/// Pyramid, comparison, and statistics for an already normalized set.
pub fn sweep_images(images: &[NormalizedIris], config: &RunConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let pyramid = build_pyramid(images, &config.scales)?;
    let levels = compare_levels(&pyramid, &config.compare)?;
    let table = table_for(&levels)?;
    Ok(SweepOutcome { levels, table })
}

/// Runs [`sweep_images`] on the configured thread pool and writes all result
/// files into `config.output_dir`.
pub fn run_sweep(images: &[NormalizedIris], config: &RunConfig) -> Result<(SweepOutcome, EmittedFiles)> {
    let outcome = with_threads(config.threads, || sweep_images(images, config))??;
    let files = emit_results(
        &outcome.levels,
        &outcome.table.rows,
        &config.histogram,
        &config.output_dir,
    )?;
    Ok((outcome, files))
}

/// File name used for an iris inside a NIR directory.
pub fn nir_file_name(image_id: &str) -> String {
    let safe: String = image_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.nir")
}

pub fn save_nir_dir(images: &[NormalizedIris], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    images
        .iter()
        .map(|img| {
            let path = dir.join(nir_file_name(&img.image_id));
            save_nir(img, &path)?;
            Ok(path)
        })
        .collect()
}

/// Loads every `*.nir` file in `dir`, ordered by file name.
pub fn load_nir_dir(dir: &Path) -> Result<Vec<NormalizedIris>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "nir") && p.is_file())
        .collect();
    paths.sort();
    paths.par_iter().map(load_nir).collect()
}

/// Directory name for one pyramid level.
pub fn level_dir_name(scale: f64) -> String {
    format!("scale_{scale}")
}

/// Pyramid levels stored as `scale_*` subdirectories, or a single level when
/// `dir` holds NIR files directly. Levels come back in descending scale.
pub fn load_levels(dir: &Path) -> Result<Vec<(ResolutionLevel, Vec<NormalizedIris>)>> {
    let direct = load_nir_dir(dir)?;
    let mut sets = Vec::new();
    if !direct.is_empty() {
        sets.push(direct);
    } else {
        let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        subdirs.sort();
        for sub in subdirs {
            let set = load_nir_dir(&sub)?;
            if !set.is_empty() {
                sets.push(set);
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::arg(format!(
            "no .nir files found in {}",
            dir.display()
        )));
    }
    let mut levels = sets
        .into_iter()
        .map(|set| {
            let first = &set[0];
            let level = ResolutionLevel {
                scale: first.scale,
                rows: first.rows(),
                cols: first.cols(),
            };
            (level, set)
        })
        .collect::<Vec<_>>();
    levels.sort_by(|a, b| b.0.scale.total_cmp(&a.0.scale));
    Ok(levels)
}
