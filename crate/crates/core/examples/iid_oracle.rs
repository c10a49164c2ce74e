// Independent uniform textures: the mean Hamming distance has a closed form
// and the fitted degrees of freedom should come out near the pixel count.
//
// `cargo run --release --example iid_oracle`

use iris_dof::compare::DEFAULT_TOLERANCE;
use iris_dof::synth::{gen_iid, SynthSpec};
use iris_dof::{all_pairs, imposter_stats, CompareConfig, ImposterStats};

pub fn run_example() -> Result<(SynthSpec, ImposterStats), Box<dyn std::error::Error>> {
    let spec = SynthSpec {
        count: 120,
        rows: 32,
        cols: 240,
        seed: 42,
        ..Default::default()
    };
    let set = gen_iid(&spec)?;
    let pairs = all_pairs(&set, &CompareConfig::default())?.pairs;
    let stats = imposter_stats(&pairs)?;

    let t = DEFAULT_TOLERANCE;
    let expected = 1.0 - (2.0 * t - t * t);
    println!("{} images, {} pairs", spec.count, pairs.len());
    println!("mean hamming {:.6} (analytic {expected:.6})", stats.mean);
    println!(
        "dof {} for {} independent pixels",
        stats.dof.unwrap_or(0),
        spec.pixel_count()
    );
    Ok((spec, stats))
}

#[allow(dead_code)]
fn main() {
    run_example().expect("iid example");
}
