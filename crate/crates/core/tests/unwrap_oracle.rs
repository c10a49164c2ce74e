//! Rubber-sheet unwrap checked against a direct geometric sampler that shares
//! no code with the library.

use std::f64::consts::PI;

use iris_dof::{unwrap, EyeImage, IrisSegmentation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Limbus crossing found by bisection on the distance to the iris center.
fn limbus_by_bisection(seg: &IrisSegmentation, angle: f64) -> (f64, f64) {
    let dir = (angle.cos(), -angle.sin());
    let outside = |t: f64| {
        let x = seg.pupil_x + t * dir.0 - seg.iris_x;
        let y = seg.pupil_y + t * dir.1 - seg.iris_y;
        (x * x + y * y).sqrt() > seg.iris_radius
    };
    let (mut lo, mut hi) = (0.0, 4.0 * seg.iris_radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if outside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (seg.pupil_x + t * dir.0, seg.pupil_y + t * dir.1)
}

/// Tent-weighted sum over the 2x2 pixel neighbourhood.
fn tent_sample(eye: &EyeImage, x: f64, y: f64) -> f64 {
    let mut acc = 0.0;
    let (bx, by) = (x.floor() as i64, y.floor() as i64);
    for py in by..=by + 1 {
        for px in bx..=bx + 1 {
            let wx = (1.0 - (x - px as f64).abs()).max(0.0);
            let wy = (1.0 - (y - py as f64).abs()).max(0.0);
            if wx * wy == 0.0 {
                continue;
            }
            acc += wx * wy * f64::from(eye.pixel(px as usize, py as usize));
        }
    }
    acc / 255.0
}

fn brute_force(eye: &EyeImage, seg: &IrisSegmentation, rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for j in 0..cols {
        let angle = 2.0 * PI * (j as f64 + 0.5) / cols as f64;
        let inner = (
            seg.pupil_x + seg.pupil_radius * angle.cos(),
            seg.pupil_y - seg.pupil_radius * angle.sin(),
        );
        let outer = limbus_by_bisection(seg, angle);
        for i in 0..rows {
            let r = (i as f64 + 0.5) / rows as f64;
            let x = inner.0 + r * (outer.0 - inner.0);
            let y = inner.1 + r * (outer.1 - inner.1);
            out[i * cols + j] = tent_sample(eye, x, y);
        }
    }
    out
}

#[test]
fn non_concentric_gradient_matches_brute_force() {
    let eye = EyeImage::from_fn("grad", "s", 160, 120, |x, y| {
        ((x as f64 * 1.1 + y as f64 * 0.7) as usize % 256) as u8
    })
    .unwrap();
    let seg = IrisSegmentation {
        pupil_x: 83.0,
        pupil_y: 57.0,
        pupil_radius: 14.0,
        iris_x: 80.0,
        iris_y: 61.0,
        iris_radius: 45.0,
    };
    // Pupil sits 5 px from the iris center.
    assert!(((83.0f64 - 80.0).hypot(57.0 - 61.0) - 5.0).abs() < 1e-12);

    let nir = unwrap(&eye, &seg, 32, 240).unwrap();
    let oracle = brute_force(&eye, &seg, 32, 240);
    assert!(nir.mask().iter().all(|&m| m));
    for (k, (a, b)) in nir.intensities().iter().zip(&oracle).enumerate() {
        assert!((a - b).abs() < 1e-6, "cell {k}: {a} vs {b}");
    }
}

/// Rings of constant intensity whose edges stay more than sqrt(2) px away from
/// every sampled radius, so every bilinear neighbourhood lies in one ring.
#[test]
fn radially_symmetric_source_gives_constant_rows() {
    let (cx, cy) = (100.0, 90.0);
    // 16 rows over a 50 px annulus: sample radii 21.5625 + 3.125 i, ring edges
    // every 6.25 px from r = 20, so each sample is 1.5625 px from an edge.
    let eye = EyeImage::from_fn("rings", "s", 200, 180, |x, y| {
        let d = (x as f64 - cx).hypot(y as f64 - cy);
        let ring = ((d - 20.0) / 6.25).floor().clamp(-1.0, 9.0) as i32 + 1;
        (10 + 20 * ring) as u8
    })
    .unwrap();
    let seg = IrisSegmentation::concentric(cx, cy, 20.0, 70.0);
    let nir = unwrap(&eye, &seg, 16, 960).unwrap();
    assert_eq!(nir.dims(), (16, 960));
    for i in 0..16 {
        let first = nir.intensity(i, 0);
        for j in 0..960 {
            assert!((nir.intensity(i, j) - first).abs() < 1e-9, "row {i} col {j}");
        }
    }
    // Neighbouring rows alternate between staying in a ring and crossing one.
    assert!(nir.intensity(15, 0) > nir.intensity(0, 0));
}

/// Rotating the source by a quarter turn about an integer pupil center is an
/// exact pixel permutation; the unwrap must shift columns by cols / 4.
#[test]
fn quarter_turn_rotation_shifts_columns() {
    let size = 151;
    let c = 75.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let px: Vec<u8> = (0..size * size).map(|_| rng.random()).collect();
    let eye = EyeImage::from_fn("src", "s", size, size, |x, y| px[y * size + x]).unwrap();
    // Counterclockwise on screen: (x, y) -> (y, 2c - x) in pixel indices.
    let rotated = EyeImage::from_fn("rot", "s", size, size, |x, y| {
        // Destination (x, y) came from source (2c - y, x).
        let sx = 2 * 75 - y;
        let sy = x;
        px[sy * size + sx]
    })
    .unwrap();
    let seg = IrisSegmentation::concentric(c, c, 15.0, 60.0);
    let (rows, cols) = (24, 960);
    let a = unwrap(&eye, &seg, rows, cols).unwrap();
    let b = unwrap(&rotated, &seg, rows, cols).unwrap();
    let k = cols / 4;
    for i in 0..rows {
        for j in 0..cols {
            let expect = a.intensity(i, j);
            let got = b.intensity(i, (j + k) % cols);
            assert!((expect - got).abs() < 1e-6, "({i}, {j}): {expect} vs {got}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unwrap_dims_and_linearity(
        rows in 1usize..20,
        cols in 1usize..80,
        alpha in 1u8..4,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<u8> = (0..90 * 70).map(|_| rng.random_range(0..60)).collect();
        let eye = EyeImage::from_fn("a", "s", 90, 70, |x, y| base[y * 90 + x]).unwrap();
        let scaled = EyeImage::from_fn("a", "s", 90, 70, |x, y| base[y * 90 + x] * alpha).unwrap();
        let seg = IrisSegmentation {
            pupil_x: 44.0 + rng.random_range(-3.0..3.0),
            pupil_y: 35.0 + rng.random_range(-3.0..3.0),
            pupil_radius: rng.random_range(4.0..10.0),
            iris_x: 45.0,
            iris_y: 35.0,
            iris_radius: rng.random_range(18.0..30.0),
        };
        let u = unwrap(&eye, &seg, rows, cols).unwrap();
        let v = unwrap(&scaled, &seg, rows, cols).unwrap();
        prop_assert_eq!(u.dims(), (rows, cols));
        for (a, b) in u.intensities().iter().zip(v.intensities()) {
            prop_assert!((a * f64::from(alpha) - b).abs() < 1e-12);
        }
    }
}
