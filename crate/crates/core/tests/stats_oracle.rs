use iris_dof::stats::{imposter_stats, Normalization};
use iris_dof::{estimate_dof, histogram_with_overlay, HistogramSpec, PairResult};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn binomial_pairs(trials: u64, p_mismatch: f64, draws: usize, seed: u64) -> Vec<PairResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(trials, p_mismatch).unwrap();
    (0..draws)
        .map(|i| {
            let k = dist.sample(&mut rng);
            PairResult {
                id_a: format!("a{i:06}"),
                id_b: format!("b{i:06}"),
                overlap: trials,
                mismatches: k,
                hamming: k as f64 / trials as f64,
            }
        })
        .collect()
}

#[test]
fn sampled_binomials_recover_their_trial_count() {
    for (k, p, seed) in [(536, 0.973508, 1), (7680, 0.996082, 2), (40, 0.5, 3), (1000, 0.9, 4)] {
        let stats = imposter_stats(&binomial_pairs(k, p, 10_000, seed)).unwrap();
        let dof = stats.dof.unwrap() as f64;
        assert!(
            (dof - k as f64).abs() <= 0.10 * k as f64,
            "K = {k}, p = {p}: recovered {dof}"
        );
    }
}

#[test]
fn overlay_fits_sampled_histogram() {
    let pairs = binomial_pairs(100, 0.97, 100_000, 17);
    let stats = imposter_stats(&pairs).unwrap();
    assert_eq!(stats.dof, Some(100));
    let spec = HistogramSpec {
        bin_width: None,
        normalization: Normalization::Counts,
    };
    let h = histogram_with_overlay(&pairs, &stats, &spec).unwrap();

    // Pool adjacent bins until each group expects at least 5 draws.
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for b in &h.bins {
        obs += b.count as f64;
        exp += b.overlay;
        if exp >= 5.0 {
            groups.push((obs, exp));
            (obs, exp) = (0.0, 0.0);
        }
    }
    if let Some(last) = groups.last_mut() {
        last.0 += obs;
        last.1 += exp;
    }
    let chi2: f64 = groups.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    // Mean and dof were fitted from the sample: two fewer degrees of freedom.
    let df = (groups.len() - 3) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2 {chi2:.2} >= {critical:.2} at df {df}");
}

/// Textbook two-pass moments, used only as an oracle.
fn two_pass(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

proptest! {
    #[test]
    fn moments_agree_with_two_pass(values in prop::collection::vec(0.0f64..1.0, 2..300)) {
        let stats = iris_dof::stats::imposter_stats_from_values(values.clone()).unwrap();
        let (mean, std) = two_pass(&values);
        prop_assert!((stats.mean - mean).abs() <= 1e-12);
        prop_assert!((stats.std - std).abs() <= 1e-9 * std.max(1e-3));
    }

    #[test]
    fn dof_scales_inversely_with_variance(p in 0.05f64..0.95, n in 1u64..5000, c in 1u64..20) {
        let std = (p * (1.0 - p) / n as f64).sqrt();
        let (base, _) = estimate_dof(p, std).unwrap();
        let (scaled, _) = estimate_dof(p, std / (c as f64).sqrt()).unwrap();
        prop_assert!((scaled / base - c as f64).abs() <= 1e-9 * c as f64);
    }

    #[test]
    fn dof_round_trips_binomial_moments(p in 0.01f64..0.99, n in 1u64..100_000) {
        let (_, dof) = estimate_dof(p, (p * (1.0 - p) / n as f64).sqrt()).unwrap();
        prop_assert_eq!(dof, n);
    }
}
