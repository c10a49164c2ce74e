// From eye images on disk to stats.csv: a manifest of PGM files with
// segmentation circles, normalized, selected, and swept over resolutions.
//
// `cargo run --release --example manifest_pipeline`

use std::fmt::Write as _;
use std::fs;

use iris_dof::io::{parse_manifest, write_pgm};
use iris_dof::pipeline::{normalize_dataset, run_sweep, RunConfig};
use iris_dof::EyeImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<Vec<String>, Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut manifest = String::from(
        "image_id,subject_id,eye_side,image_path,pupil_x,pupil_y,pupil_r,iris_x,iris_y,iris_r\n",
    );
    for i in 0..8 {
        let id = format!("eye{i}");
        // Every fifth image is underexposed and should be dropped.
        let (lo, hi) = if i % 5 == 4 { (5, 50) } else { (40, 220) };
        let eye = EyeImage::from_fn(&id, &id, 220, 200, |_, _| rng.random_range(lo..=hi))?;
        write_pgm(&eye, dir.path().join(format!("{id}.pgm")))?;
        writeln!(manifest, "{id},s{i},left,{id}.pgm,110,100,28,110,100,85")?;
    }
    let manifest_path = dir.path().join("manifest.csv");
    fs::write(&manifest_path, manifest)?;

    let config = RunConfig {
        scales: vec![1.0, 0.5, 0.2],
        output_dir: dir.path().join("results"),
        ..Default::default()
    };
    let set = normalize_dataset(&parse_manifest(&manifest_path)?, &config.criteria, &config.normalize)?;
    for r in &set.rejected {
        println!("rejected {}: {}", r.image_id, r.reason);
    }
    let (outcome, files) = run_sweep(&set.irises, &config)?;
    for row in &outcome.table.rows {
        println!(
            "{}x{}: mean {:.6}, dof {:?}",
            row.level.rows, row.level.cols, row.stats.mean, row.stats.dof
        );
    }
    let stats = fs::read_to_string(config.output_dir.join("stats.csv"))?;
    print!("{stats}");
    Ok(files
        .written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("manifest example");
}
