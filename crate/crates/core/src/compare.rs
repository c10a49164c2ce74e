//! Masked tolerance Hamming distances and the all-imposter-pairs driver.
//!
//! Two cells match when their intensities differ by strictly less than the
//! tolerance. The Hamming distance of a pair is the fraction of cells valid in
//! both images that do not match. Counts are exact integers; the division
//! happens once per pair.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::NormalizedIris;

/// Default match tolerance, half an 8-bit intensity step.
pub const DEFAULT_TOLERANCE: f64 = 0.5 / 255.0;

/// Images per side of a tile of the pair triangle.
const TILE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub tolerance: f64,
    pub exclude_same_subject: bool,
    pub min_overlap: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            exclude_same_subject: true,
            min_overlap: 1,
        }
    }
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::arg(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.min_overlap < 1 {
            return Err(Error::arg("min_overlap must be at least 1"));
        }
        Ok(())
    }
}

/// One imposter comparison. `id_a < id_b` lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub id_a: String,
    pub id_b: String,
    pub overlap: u64,
    pub mismatches: u64,
    pub hamming: f64,
}

impl PairResult {
    fn new(x: &str, y: &str, overlap: u64, mismatches: u64) -> Self {
        let (id_a, id_b) = if x <= y { (x, y) } else { (y, x) };
        Self {
            id_a: id_a.to_owned(),
            id_b: id_b.to_owned(),
            overlap,
            mismatches,
            hamming: mismatches as f64 / overlap as f64,
        }
    }
}

/// Output of [`all_pairs`]: emitted results plus counts of skipped pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<PairResult>,
    pub same_subject_excluded: u64,
    pub below_min_overlap: u64,
}

#[inline]
pub fn pixels_match(a: f64, b: f64, tolerance: f64) -> bool {
    (a - b).abs() < tolerance
}

/// Counts `(overlap, mismatches)` over aligned cell slices.
///
/// Written branch-free over fixed-size chunks so the compiler can vectorize
/// the compare/and/accumulate sequence.
#[inline]
fn count_cells(a: &[f64], ma: &[u8], b: &[f64], mb: &[u8], tol: f64) -> (u64, u64) {
    const CHUNK: usize = 256;
    let n = a.len();
    debug_assert!(ma.len() == n && b.len() == n && mb.len() == n);
    let mut overlap = 0u64;
    let mut mismatches = 0u64;
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let mut ov = 0u32;
        let mut mm = 0u32;
        for k in start..end {
            let both = u32::from(ma[k] & mb[k]);
            let differ = u32::from((a[k] - b[k]).abs() >= tol);
            ov += both;
            mm += both & differ;
        }
        overlap += u64::from(ov);
        mismatches += u64::from(mm);
        start = end;
    }
    (overlap, mismatches)
}

/// Flattened view of one image for the engine.
struct Prepared<'a> {
    nir: &'a NormalizedIris,
    mask: Vec<u8>,
}

impl<'a> Prepared<'a> {
    fn new(nir: &'a NormalizedIris) -> Self {
        Self {
            nir,
            mask: nir.mask().iter().map(|&m| u8::from(m)).collect(),
        }
    }

    fn counts(&self, other: &Prepared<'_>, tol: f64) -> (u64, u64) {
        count_cells(
            self.nir.intensities(),
            &self.mask,
            other.nir.intensities(),
            &other.mask,
            tol,
        )
    }
}

fn check_dims(x: &NormalizedIris, y: &NormalizedIris) -> Result<()> {
    if x.dims() != y.dims() {
        return Err(Error::arg(format!(
            "cannot compare {} ({}x{}) with {} ({}x{})",
            x.image_id,
            x.rows(),
            x.cols(),
            y.image_id,
            y.rows(),
            y.cols()
        )));
    }
    Ok(())
}

/// Hamming distance between two images, or `None` when the overlap is below
/// `cfg.min_overlap`.
pub fn hamming_pair(
    x: &NormalizedIris,
    y: &NormalizedIris,
    cfg: &CompareConfig,
) -> Result<Option<PairResult>> {
    check_dims(x, y)?;
    cfg.validate()?;
    let (overlap, mismatches) = Prepared::new(x).counts(&Prepared::new(y), cfg.tolerance);
    if overlap < cfg.min_overlap {
        return Ok(None);
    }
    Ok(Some(PairResult::new(&x.image_id, &y.image_id, overlap, mismatches)))
}

enum Outcome {
    Emitted(PairResult),
    SameSubject,
    LowOverlap,
}

/// Compares every unordered pair of distinct images.
///
/// Work is split into tiles of the pair triangle and processed on the current
/// rayon pool. The result is sorted by `(id_a, id_b)` and does not depend on
/// the number of worker threads.
pub fn all_pairs(set: &[NormalizedIris], cfg: &CompareConfig) -> Result<PairSet> {
    cfg.validate()?;
    if set.len() < 2 {
        return Err(Error::arg(format!(
            "all_pairs needs at least 2 images, got {}",
            set.len()
        )));
    }
    let mut seen = HashSet::with_capacity(set.len());
    for nir in set {
        check_dims(&set[0], nir)?;
        if !seen.insert(nir.image_id.as_str()) {
            return Err(Error::arg(format!("duplicate image id {:?}", nir.image_id)));
        }
    }

    let prepared: Vec<Prepared<'_>> = set.iter().map(Prepared::new).collect();
    let n_tiles = set.len().div_ceil(TILE);
    let tiles: Vec<(usize, usize)> = (0..n_tiles)
        .flat_map(|ti| (ti..n_tiles).map(move |tj| (ti, tj)))
        .collect();

    let outcomes: Vec<Outcome> = tiles
        .par_iter()
        .flat_map_iter(|&(ti, tj)| {
            let prepared = &prepared;
            let rows = ti * TILE..((ti + 1) * TILE).min(set.len());
            rows.flat_map(move |i| {
                let start = if ti == tj { i + 1 } else { tj * TILE };
                let end = ((tj + 1) * TILE).min(prepared.len());
                (start..end).map(move |j| {
                    let (x, y) = (&prepared[i], &prepared[j]);
                    if cfg.exclude_same_subject && x.nir.subject_id == y.nir.subject_id {
                        return Outcome::SameSubject;
                    }
                    let (overlap, mismatches) = x.counts(y, cfg.tolerance);
                    if overlap < cfg.min_overlap {
                        return Outcome::LowOverlap;
                    }
                    Outcome::Emitted(PairResult::new(
                        &x.nir.image_id,
                        &y.nir.image_id,
                        overlap,
                        mismatches,
                    ))
                })
            })
        })
        .collect();

    let mut out = PairSet::default();
    for o in outcomes {
        match o {
            Outcome::Emitted(p) => out.pairs.push(p),
            Outcome::SameSubject => out.same_subject_excluded += 1,
            Outcome::LowOverlap => out.below_min_overlap += 1,
        }
    }
    out.pairs
        .par_sort_unstable_by(|a, b| (&a.id_a, &a.id_b).cmp(&(&b.id_a, &b.id_b)));
    if out.below_min_overlap > 0 {
        log::info!(
            "{} pairs skipped below min overlap {}",
            out.below_min_overlap,
            cfg.min_overlap
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nir(id: &str, subject: &str, vals: Vec<f64>, mask: Vec<bool>) -> NormalizedIris {
        let n = vals.len();
        NormalizedIris::new(id, subject, 1, n, vals, mask).unwrap()
    }

    #[test]
    fn match_predicate_is_strict() {
        let t = DEFAULT_TOLERANCE;
        assert!(pixels_match(0.5, 0.5 + 0.4 / 255.0, t));
        assert!(!pixels_match(0.0, 0.5 / 255.0, t));
        assert!(pixels_match(0.3, 0.3, t));
    }

    #[test]
    fn self_comparison_is_zero() {
        let x = nir("a", "s", vec![0.1, 0.7, 0.2], vec![true, false, true]);
        let r = hamming_pair(&x, &x, &CompareConfig::default()).unwrap().unwrap();
        assert_eq!((r.overlap, r.mismatches, r.hamming), (2, 0, 0.0));
    }

    #[test]
    fn one_of_four_mismatching() {
        let x = nir("b", "s1", vec![0.1, 0.2, 0.3, 0.4, 0.9], vec![true, true, true, true, false]);
        let y = nir("a", "s2", vec![0.1, 0.2, 0.3, 0.6, 0.0], vec![true; 5]);
        let r = hamming_pair(&x, &y, &CompareConfig::default()).unwrap().unwrap();
        assert_eq!((r.id_a.as_str(), r.id_b.as_str()), ("a", "b"));
        assert_eq!((r.overlap, r.mismatches), (4, 1));
        assert_eq!(r.hamming, 0.25);
    }

    #[test]
    fn low_overlap_yields_no_result() {
        let x = nir("a", "s1", vec![0.1, 0.2], vec![true, false]);
        let y = nir("b", "s2", vec![0.1, 0.2], vec![false, true]);
        assert_eq!(hamming_pair(&x, &y, &CompareConfig::default()).unwrap(), None);
        let cfg = CompareConfig {
            min_overlap: 3,
            ..Default::default()
        };
        let z = nir("c", "s3", vec![0.1, 0.2], vec![true, true]);
        assert_eq!(hamming_pair(&z, &z, &cfg).unwrap(), None);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let x = nir("a", "s", vec![0.1; 3], vec![true; 3]);
        let y = nir("b", "s", vec![0.1; 4], vec![true; 4]);
        assert!(matches!(
            hamming_pair(&x, &y, &CompareConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn offset_beyond_tolerance_mismatches_everywhere() {
        let vals: Vec<f64> = (0..50).map(|k| k as f64 / 60.0).collect();
        let x = nir("a", "s1", vals.clone(), vec![true; 50]);
        let y = nir("b", "s2", vals.iter().map(|v| v + 0.003).collect(), vec![true; 50]);
        let r = hamming_pair(&x, &y, &CompareConfig::default()).unwrap().unwrap();
        assert_eq!(r.hamming, 1.0);
    }

    fn set_of(n: usize, subjects: &[&str]) -> Vec<NormalizedIris> {
        (0..n)
            .map(|i| nir(&format!("img{i}"), subjects[i], vec![i as f64 / 10.0; 4], vec![true; 4]))
            .collect()
    }

    #[test]
    fn pair_counts() {
        let set = set_of(3, &["a", "b", "c"]);
        assert_eq!(all_pairs(&set, &CompareConfig::default()).unwrap().pairs.len(), 3);

        let set = set_of(4, &["a", "b", "a", "c"]);
        let out = all_pairs(&set, &CompareConfig::default()).unwrap();
        assert_eq!(out.pairs.len(), 5);
        assert_eq!(out.same_subject_excluded, 1);

        let cfg = CompareConfig {
            exclude_same_subject: false,
            ..Default::default()
        };
        assert_eq!(all_pairs(&set, &cfg).unwrap().pairs.len(), 6);
    }

    #[test]
    fn all_pairs_argument_errors() {
        let one = set_of(1, &["a"]);
        assert!(all_pairs(&one, &CompareConfig::default()).is_err());
        let mut dup = set_of(2, &["a", "b"]);
        dup[1].image_id = "img0".into();
        assert!(all_pairs(&dup, &CompareConfig::default()).is_err());
        let bad = CompareConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(all_pairs(&set_of(2, &["a", "b"]), &bad).is_err());
    }

    #[test]
    fn output_is_sorted_by_ids() {
        let ids = ["m", "c", "x", "a", "q"];
        let set: Vec<_> = ids
            .iter()
            .map(|id| nir(id, id, vec![0.5; 4], vec![true; 4]))
            .collect();
        let out = all_pairs(&set, &CompareConfig::default()).unwrap();
        let keys: Vec<_> = out.pairs.iter().map(|p| (p.id_a.clone(), p.id_b.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(keys.iter().all(|(a, b)| a < b));
    }

    #[test]
    fn chunk_boundaries_do_not_drop_cells() {
        for n in [1, 255, 256, 257, 1000] {
            let a = vec![0.0; n];
            let b = vec![1.0; n];
            let m = vec![1u8; n];
            assert_eq!(count_cells(&a, &m, &b, &m, 0.1), (n as u64, n as u64));
        }
    }
}
