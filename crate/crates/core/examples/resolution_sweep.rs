// Degrees of freedom versus resolution for a spatially correlated texture.
//
// `cargo run --release --example resolution_sweep`

use iris_dof::pipeline::{sweep_images, RunConfig};
use iris_dof::stats::SweepRow;
use iris_dof::synth::{gen_correlated, SynthSpec};

pub fn run_example() -> Result<Vec<SweepRow>, Box<dyn std::error::Error>> {
    let spec = SynthSpec {
        count: 80,
        rows: 64,
        cols: 480,
        correlation_sigma: 2.0,
        seed: 7,
        ..Default::default()
    };
    let set = gen_correlated(&spec)?;
    let config = RunConfig {
        scales: vec![1.0, 0.5, 0.3, 0.1, 0.05],
        ..Default::default()
    };
    let outcome = sweep_images(&set, &config)?;
    println!("{:>5}  {:>7}  {:>8}  {:>11}  {:>11}  {:>6}", "scale", "grid", "pairs", "mean", "std", "dof");
    for row in &outcome.table.rows {
        println!(
            "{:>5}  {:>3}x{:<3}  {:>8}  {:>11.9}  {:>11.9}  {:>6}",
            row.level.scale,
            row.level.rows,
            row.level.cols,
            row.stats.n_pairs,
            row.stats.mean,
            row.stats.std,
            row.stats.dof.map_or("-".into(), |d| d.to_string())
        );
    }
    Ok(outcome.table.rows)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("sweep example");
}
