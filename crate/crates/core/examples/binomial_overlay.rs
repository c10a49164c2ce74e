// Imposter histogram with the fitted binomial overlaid, drawn as text.
//
// `cargo run --release --example binomial_overlay`

use iris_dof::synth::{gen_correlated, SynthSpec};
use iris_dof::stats::HistogramOverlay;
use iris_dof::{all_pairs, histogram_with_overlay, imposter_stats, CompareConfig, HistogramSpec};

pub fn run_example() -> Result<HistogramOverlay, Box<dyn std::error::Error>> {
    // A small, low-contrast set keeps N modest so the bars are readable.
    let spec = SynthSpec {
        count: 60,
        rows: 8,
        cols: 48,
        correlation_sigma: 1.0,
        seed: 3,
        ..Default::default()
    };
    let pairs = all_pairs(&gen_correlated(&spec)?, &CompareConfig::default())?.pairs;
    let stats = imposter_stats(&pairs)?;
    let h = histogram_with_overlay(&pairs, &stats, &HistogramSpec::default())?;
    println!(
        "{} pairs, mean {:.4}, N = {}",
        pairs.len(),
        stats.mean,
        h.model.trials()
    );

    let peak = h
        .bins
        .iter()
        .map(|b| b.value.max(b.overlay))
        .fold(0.0, f64::max);
    for b in h.bins.iter().filter(|b| b.value > 0.0 || b.overlay > 1e-3) {
        let bar = "#".repeat((60.0 * b.value / peak).round() as usize);
        let fit = ((60.0 * b.overlay / peak).round() as usize).max(1);
        let mut line = format!("{bar:<61}");
        line.replace_range(fit - 1..fit, "|");
        println!("{:.4} {line}", b.left);
    }
    Ok(h)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("overlay example");
}
