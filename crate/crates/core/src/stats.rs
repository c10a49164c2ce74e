//! Imposter-distribution statistics and the binomial model.
//!
//! For a binomial proportion `x = k / N` with success probability `p`, the
//! standard deviation is `sqrt(p (1 - p) / N)`. Inverting that relation on the
//! observed mean and standard deviation of the Hamming distances gives the
//! number of independent Bernoulli trials the distribution behaves like: the
//! binomial degrees of freedom.

use statrs::function::gamma::ln_gamma;

use crate::compare::PairResult;
use crate::error::{Error, Result};
use crate::preprocess::ResolutionLevel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialModel {
    trials: u64,
    success_prob: f64,
}

impl BinomialModel {
    pub fn new(trials: u64, success_prob: f64) -> Result<Self> {
        if trials < 1 {
            return Err(Error::arg("binomial model needs at least one trial"));
        }
        if !(0.0..=1.0).contains(&success_prob) {
            return Err(Error::arg(format!(
                "success probability {success_prob} outside [0, 1]"
            )));
        }
        Ok(Self {
            trials,
            success_prob,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }
}

/// `C(N, k) p^k (1 - p)^(N - k)`, evaluated in log space.
pub fn binomial_pmf(model: &BinomialModel, k: u64) -> Result<f64> {
    let n = model.trials;
    if k > n {
        return Err(Error::arg(format!("k = {k} outside [0, {n}]")));
    }
    let p = model.success_prob;
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    let (nf, kf) = (n as f64, k as f64);
    let ln = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
        + kf * p.ln()
        + (nf - kf) * (-p).ln_1p();
    Ok(ln.exp().clamp(0.0, 1.0))
}

/// `N = p (1 - p) / σ²`, returned both as a real and rounded half away from
/// zero.
pub fn estimate_dof(mean: f64, std: f64) -> Result<(f64, u64)> {
    if !(mean > 0.0 && mean < 1.0) {
        return Err(Error::DegenerateDistribution(format!(
            "mean {mean} must lie strictly inside (0, 1)"
        )));
    }
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::DegenerateDistribution(format!(
            "standard deviation {std} must be positive"
        )));
    }
    let dof_real = mean * (1.0 - mean) / (std * std);
    Ok((dof_real, (dof_real.round() as u64).max(1)))
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImposterStats {
    pub n_pairs: u64,
    /// Mean Hamming distance.
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// `None` when the distribution is degenerate (zero spread).
    pub dof_real: Option<f64>,
    pub dof: Option<u64>,
}

impl ImposterStats {
    /// Builds stats from already-known moments, e.g. published summaries.
    pub fn from_moments(n_pairs: u64, mean: f64, std: f64) -> Self {
        let (dof_real, dof) = match estimate_dof(mean, std) {
            Ok((r, d)) => (Some(r), Some(d)),
            Err(_) => (None, None),
        };
        Self {
            n_pairs,
            mean,
            std,
            dof_real,
            dof,
        }
    }

    pub fn binomial(&self) -> Result<BinomialModel> {
        let dof = self.dof.ok_or_else(|| {
            Error::DegenerateDistribution("degrees of freedom undefined (zero spread)".into())
        })?;
        BinomialModel::new(dof, self.mean)
    }
}

/// Mean, sample standard deviation, and degrees of freedom of the Hamming
/// distances.
pub fn imposter_stats(pairs: &[PairResult]) -> Result<ImposterStats> {
    imposter_stats_from_values(pairs.iter().map(|p| p.hamming).collect())
}

/// As [`imposter_stats`], on raw distances. Values are summed in sorted order
/// so the result is bit-identical under any permutation of the input.
pub fn imposter_stats_from_values(mut values: Vec<f64>) -> Result<ImposterStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::arg(format!(
            "imposter statistics need at least 2 pairs, got {n}"
        )));
    }
    values.sort_unstable_by(f64::total_cmp);
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let ss = compensated_sum(values.iter().map(|&h| (h - mean) * (h - mean)));
    let std = (ss / (n - 1) as f64).sqrt();
    Ok(ImposterStats::from_moments(n as u64, mean, std))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    Counts,
    #[default]
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HistogramSpec {
    /// Bin width over [0, 1]; `None` uses `1 / N`, the binomial lattice pitch.
    pub bin_width: Option<f64>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub count: u64,
    /// Count or probability mass, per the requested normalization.
    pub value: f64,
    /// Binomial overlay mass falling in this bin, same normalization.
    pub overlay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramOverlay {
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    /// `(k / N, mass)` for `k` in `0..=N`, scaled to the histogram's total.
    pub overlay: Vec<(f64, f64)>,
    pub model: BinomialModel,
}

fn bin_count(width: f64) -> usize {
    let v = 1.0 / width;
    let r = v.round();
    let n = if (v - r).abs() < 1e-9 { r } else { v.ceil() };
    (n as usize).max(1)
}

#[inline]
fn bin_index(x: f64, width: f64, n_bins: usize) -> usize {
    // Values on the lattice `k * width` belong to bin k despite rounding.
    let idx = (x / width + 1e-9).floor();
    if idx < 0.0 {
        0
    } else {
        (idx as usize).min(n_bins - 1)
    }
}

/// Histogram of the Hamming distances with the binomial model of the same
/// mean and (rounded) degrees of freedom overlaid.
pub fn histogram_with_overlay(
    pairs: &[PairResult],
    stats: &ImposterStats,
    spec: &HistogramSpec,
) -> Result<HistogramOverlay> {
    let model = stats.binomial()?;
    if pairs.is_empty() {
        return Err(Error::arg("histogram needs at least one pair"));
    }
    let n = model.trials();
    let width = spec.bin_width.unwrap_or(1.0 / n as f64);
    if !(width > 0.0 && width <= 1.0) {
        return Err(Error::arg(format!("bin width {width} outside (0, 1]")));
    }
    let n_bins = bin_count(width);

    let mut counts = vec![0u64; n_bins];
    for p in pairs {
        counts[bin_index(p.hamming, width, n_bins)] += 1;
    }
    let total = pairs.len() as f64;
    let scale = match spec.normalization {
        Normalization::Counts => total,
        Normalization::Probability => 1.0,
    };

    let mut overlay = Vec::with_capacity(n as usize + 1);
    let mut overlay_bins = vec![0.0; n_bins];
    for k in 0..=n {
        let x = k as f64 / n as f64;
        let mass = binomial_pmf(&model, k)? * scale;
        overlay_bins[bin_index(x, width, n_bins)] += mass;
        overlay.push((x, mass));
    }

    let bins = counts
        .iter()
        .zip(overlay_bins)
        .enumerate()
        .map(|(i, (&count, overlay))| HistogramBin {
            left: i as f64 * width,
            count,
            value: count as f64 / total * scale,
            overlay,
        })
        .collect();
    Ok(HistogramOverlay {
        bin_width: width,
        bins,
        overlay,
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub level: ResolutionLevel,
    pub stats: ImposterStats,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Levels that produced no row, with the reason.
    pub diagnostics: Vec<String>,
}

/// One row of statistics per resolution level, in descending scale order.
pub fn sweep_table(levels: &[(ResolutionLevel, Vec<PairResult>)]) -> Result<SweepTable> {
    if levels.windows(2).any(|w| w[0].0.scale <= w[1].0.scale) {
        return Err(Error::arg("sweep levels must be strictly descending by scale"));
    }
    let mut table = SweepTable::default();
    for (level, pairs) in levels {
        if pairs.is_empty() {
            table
                .diagnostics
                .push(format!("scale {}: no pairs, level skipped", level.scale));
            continue;
        }
        match imposter_stats(pairs) {
            Ok(stats) => table.rows.push(SweepRow {
                level: *level,
                stats,
            }),
            Err(e) => table
                .diagnostics
                .push(format!("scale {}: {e}, level skipped", level.scale)),
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs_with(values: &[f64]) -> Vec<PairResult> {
        values
            .iter()
            .enumerate()
            .map(|(i, &h)| PairResult {
                id_a: format!("a{i:05}"),
                id_b: format!("b{i:05}"),
                overlap: 1000,
                mismatches: (h * 1000.0).round() as u64,
                hamming: h,
            })
            .collect()
    }

    #[test]
    fn pmf_small_cases() {
        let pmf = |n, p, k| binomial_pmf(&BinomialModel::new(n, p).unwrap(), k).unwrap();
        assert!((pmf(1, 0.5, 0) - 0.5).abs() < 1e-14);
        assert!((pmf(4, 0.5, 2) - 0.375).abs() < 1e-14);
        assert!((pmf(2, 0.25, 1) - 0.375).abs() < 1e-14);
        assert_eq!(pmf(3, 0.0, 0), 1.0);
        assert_eq!(pmf(3, 1.0, 2), 0.0);
        assert!(binomial_pmf(&BinomialModel::new(3, 0.5).unwrap(), 4).is_err());
        assert!(BinomialModel::new(0, 0.5).is_err());
        assert!(BinomialModel::new(3, 1.5).is_err());
    }

    #[test]
    fn dof_examples() {
        assert_eq!(estimate_dof(0.973508055, 0.006933829).unwrap().1, 536);
        assert_eq!(estimate_dof(0.968513619, 0.015774466).unwrap().1, 123);
        assert_eq!(estimate_dof(0.972312082, 0.008135030).unwrap().1, 407);
        assert_eq!(estimate_dof(0.5, 0.5).unwrap(), (1.0, 1));
        assert!(matches!(
            estimate_dof(0.5, 0.0),
            Err(Error::DegenerateDistribution(_))
        ));
        assert!(estimate_dof(0.0, 0.1).is_err());
        assert!(estimate_dof(1.0, 0.1).is_err());
    }

    #[test]
    fn stats_examples() {
        let s = imposter_stats(&pairs_with(&[0.5, 0.5])).unwrap();
        assert_eq!((s.mean, s.std, s.dof), (0.5, 0.0, None));

        let s = imposter_stats(&pairs_with(&[0.4, 0.6])).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert!((s.std - 0.1414214).abs() < 1e-7);
        assert!((s.dof_real.unwrap() - 12.5).abs() < 1e-9);
        assert_eq!(s.dof, Some(13));

        assert!(imposter_stats(&pairs_with(&[0.4])).is_err());
    }

    #[test]
    fn single_bin_holds_all_mass() {
        let pairs = pairs_with(&[0.41, 0.42, 0.43, 0.44]);
        let stats = imposter_stats(&pairs).unwrap();
        let spec = HistogramSpec {
            bin_width: Some(0.25),
            normalization: Normalization::Probability,
        };
        let h = histogram_with_overlay(&pairs, &stats, &spec).unwrap();
        assert_eq!(h.bins.len(), 4);
        assert_eq!(h.bins[1].count, 4);
        assert!((h.bins[1].value - 1.0).abs() < 1e-15);
        let overlay: f64 = h.overlay.iter().map(|p| p.1).sum();
        assert!((overlay - 1.0).abs() < 1e-9);
        let per_bin: f64 = h.bins.iter().map(|b| b.overlay).sum();
        assert!((per_bin - 1.0).abs() < 1e-9);
    }

    #[test]
    fn counts_normalization_scales_overlay() {
        let pairs = pairs_with(&[0.2, 0.3, 0.35, 0.4, 0.6]);
        let stats = imposter_stats(&pairs).unwrap();
        let spec = HistogramSpec {
            bin_width: None,
            normalization: Normalization::Counts,
        };
        let h = histogram_with_overlay(&pairs, &stats, &spec).unwrap();
        assert_eq!(h.bins.len() as u64, stats.dof.unwrap());
        assert!((h.bins.iter().map(|b| b.value).sum::<f64>() - 5.0).abs() < 1e-12);
        assert!((h.overlay.iter().map(|p| p.1).sum::<f64>() - 5.0).abs() < 1e-9);
        assert!((h.bins.last().unwrap().left + h.bin_width - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_requires_defined_dof() {
        let pairs = pairs_with(&[0.5, 0.5]);
        let stats = imposter_stats(&pairs).unwrap();
        assert!(matches!(
            histogram_with_overlay(&pairs, &stats, &HistogramSpec::default()),
            Err(Error::DegenerateDistribution(_))
        ));
    }

    fn level(scale: f64) -> ResolutionLevel {
        ResolutionLevel::standard(scale).unwrap()
    }

    #[test]
    fn sweep_skips_empty_levels_and_keeps_order() {
        let levels = vec![
            (level(1.0), pairs_with(&[0.4, 0.6])),
            (level(0.5), vec![]),
            (level(0.1), pairs_with(&[0.3, 0.5, 0.7])),
        ];
        let t = sweep_table(&levels).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.diagnostics.len(), 1);
        assert_eq!(t.rows[0].level.scale, 1.0);
        assert_eq!(t.rows[1].level.rows, 13);
        assert_eq!(t.rows[0].stats, imposter_stats(&levels[0].1).unwrap());

        let unsorted = vec![(level(0.5), vec![]), (level(1.0), vec![])];
        assert!(sweep_table(&unsorted).is_err());
    }

    #[test]
    fn sweep_rows_recover_table_values_from_two_point_levels() {
        // Two values m +- s / sqrt(2) have mean m and sample std s.
        let level_pairs = |m: f64, s: f64| {
            let d = s / 2f64.sqrt();
            pairs_with(&[m - d, m + d])
        };
        let levels = vec![
            (level(1.0), level_pairs(0.973508055, 0.006933829)),
            (level(0.05), level_pairs(0.968513619, 0.015774466)),
        ];
        let t = sweep_table(&levels).unwrap();
        let dofs: Vec<_> = t.rows.iter().map(|r| r.stats.dof.unwrap()).collect();
        assert_eq!(dofs, vec![536, 123]);
    }

    proptest! {
        #[test]
        fn stats_are_permutation_invariant(
            mut values in prop::collection::vec(0.0f64..1.0, 2..300),
            seed in any::<u64>(),
        ) {
            let a = imposter_stats(&pairs_with(&values)).unwrap();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            values.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = imposter_stats(&pairs_with(&values)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn compensated_sum_matches_exact_integer_sum(values in prop::collection::vec(-1000i32..1000, 0..500)) {
            let exact: i64 = values.iter().map(|&v| i64::from(v)).sum();
            let s = compensated_sum(values.iter().map(|&v| f64::from(v) / 8.0));
            prop_assert_eq!(s, exact as f64 / 8.0);
        }
    }
}
