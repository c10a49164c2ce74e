// Saving and loading normalized irises in the NIR1 container.
//
// `cargo run --example nir_roundtrip`

use iris_dof::io::{decode_nir, encode_nir, load_nir, save_nir};
use iris_dof::NormalizedIris;

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let (rows, cols) = (13, 96);
    let values = (0..rows * cols).map(|i| (i % 256) as f64 / 256.0).collect();
    let mask = (0..rows * cols).map(|i| i % 17 != 0).collect();
    let nir = NormalizedIris::new("04233d1207", "04233", rows, cols, values, mask)?
        .with_scale(0.1);

    let bytes = encode_nir(&nir);
    println!("{} bytes for a {rows}x{cols} grid", bytes.len());
    // Intensities are stored in single precision: values like k/256 come back
    // bit-exact, anything else is rounded once and then stays put.
    assert_eq!(decode_nir(&bytes)?, nir);
    let thirds = NormalizedIris::new("x", "y", 1, 3, vec![1.0 / 3.0; 3], vec![true; 3])?;
    let once = decode_nir(&encode_nir(&thirds))?;
    assert_eq!(encode_nir(&once), encode_nir(&thirds));
    println!("1/3 stored as {}", once.intensity(0, 0));

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("04233d1207.nir");
    save_nir(&nir, &path)?;
    let back = load_nir(&path)?;
    println!("{} reloaded, {} valid cells", back.image_id, back.valid_count());

    let mut broken = bytes.clone();
    broken.truncate(bytes.len() - 5);
    match decode_nir(&broken) {
        Err(e) => println!("truncated file: {e}"),
        Ok(_) => unreachable!("truncation must be detected"),
    }
    Ok(bytes.len())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("nir example");
}
