// Rubber-sheet unwrapping of a drawn eye with an off-center pupil, plus the
// specular-highlight mask.
//
// `cargo run --example unwrap_synthetic_eye`

use iris_dof::model::{BASE_COLS, BASE_ROWS};
use iris_dof::preprocess::valid_median;
use iris_dof::{attach_mask, specular_mask_heuristic, unwrap, EyeImage, IrisSegmentation};

pub fn run_example() -> Result<iris_dof::NormalizedIris, Box<dyn std::error::Error>> {
    let seg = IrisSegmentation {
        pupil_x: 163.0,
        pupil_y: 120.0,
        pupil_radius: 32.0,
        iris_x: 160.0,
        iris_y: 121.0,
        iris_radius: 100.0,
    };
    // Angular stripes: intensity follows the polar angle around the iris
    // center, with a bright reflection just right of the pupil.
    let eye = EyeImage::from_fn("demo", "subject", 320, 240, |x, y| {
        let (dx, dy) = (x as f64 - seg.iris_x, seg.iris_y - y as f64);
        if (dx - 45.0).hypot(dy) < 4.0 {
            255
        } else {
            (128.0 + 90.0 * (6.0 * dy.atan2(dx)).sin()) as u8
        }
    })?;

    let nir = unwrap(&eye, &seg, BASE_ROWS, BASE_COLS)?;
    let highlights = specular_mask_heuristic(&eye, &seg, &nir, 250, 2)?;
    let masked = attach_mask(&nir, None, Some(&highlights))?;

    let (rows, cols) = masked.dims();
    println!("normalized grid {rows}x{cols}");
    println!(
        "highlight cells masked: {}",
        rows * cols - highlights.count_valid()
    );
    println!(
        "median intensity {:.1} / 255",
        valid_median(&masked).unwrap_or(0.0) * 255.0
    );
    // Column 0 is 3 o'clock; a quarter of the way round is 12 o'clock.
    for col in [0, cols / 4, cols / 2, 3 * cols / 4] {
        println!("row 64, col {col:>3}: {:.3}", masked.intensity(64, col));
    }
    Ok(masked)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("unwrap example");
}
