//! Reference implementations shared by the integration tests. They favour
//! obviousness over speed and never call the optimized code paths.
#![allow(dead_code)]

use iris_dof::{CompareConfig, NormalizedIris, PairResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Quadratic loop over unordered pairs, counting with plain f64 arithmetic.
pub fn naive_all_pairs(set: &[NormalizedIris], cfg: &CompareConfig) -> Vec<PairResult> {
    let mut out = Vec::new();
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let (x, y) = (&set[i], &set[j]);
            if cfg.exclude_same_subject && x.subject_id == y.subject_id {
                continue;
            }
            let (rows, cols) = x.dims();
            let mut overlap = 0u64;
            let mut mismatches = 0u64;
            for r in 0..rows {
                for c in 0..cols {
                    if x.is_valid(r, c) && y.is_valid(r, c) {
                        overlap += 1;
                        if (x.intensity(r, c) - y.intensity(r, c)).abs() >= cfg.tolerance {
                            mismatches += 1;
                        }
                    }
                }
            }
            if overlap < cfg.min_overlap {
                continue;
            }
            let (a, b) = if x.image_id <= y.image_id {
                (&x.image_id, &y.image_id)
            } else {
                (&y.image_id, &x.image_id)
            };
            out.push(PairResult {
                id_a: a.clone(),
                id_b: b.clone(),
                overlap,
                mismatches,
                hamming: mismatches as f64 / overlap as f64,
            });
        }
    }
    out.sort_by(|p, q| (&p.id_a, &p.id_b).cmp(&(&q.id_a, &q.id_b)));
    out
}

/// Images on an 8-bit lattice (so exact ties with the tolerance occur), with
/// random masks and a handful of shared subjects.
pub fn random_masked_set(count: usize, rows: usize, cols: usize, seed: u64) -> Vec<NormalizedIris> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rows * cols;
            let values: Vec<f64> = (0..n)
                .map(|_| rng.random_range(100u32..=108) as f64 / 255.0)
                .collect();
            let keep = rng.random_range(0.3..1.0);
            let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(keep)).collect();
            NormalizedIris::new(
                format!("img{:03}", (i * 7919) % 1000),
                format!("s{}", rng.random_range(0..count.div_ceil(2))),
                rows,
                cols,
                values,
                mask,
            )
            .unwrap()
        })
        .collect()
}

/// Match probability of two independent U(0, 1) draws under strict
/// tolerance `t`: the area of the band |a - b| < t in the unit square.
pub fn uniform_match_probability(t: f64) -> f64 {
    2.0 * t - t * t
}

/// Writes a small eye-image dataset (PGM files, one PBM mask, a manifest) and
/// returns the manifest path. Image `dim` is too dark and image `wide` has an
/// oversized pupil, so selection rejects exactly those two.
pub fn write_eye_dataset(dir: &std::path::Path, count: usize, seed: u64) -> std::path::PathBuf {
    use iris_dof::io::{write_pbm_mask, write_pgm};
    use iris_dof::{EyeImage, OcclusionMask};
    use std::fmt::Write as _;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::from(
        "image_id,subject_id,eye_side,image_path,pupil_x,pupil_y,pupil_r,iris_x,iris_y,iris_r,mask_path\n",
    );
    let mut add = |id: &str, side: &str, lo: u8, hi: u8, pupil: f64, mask: Option<&str>| {
        let img = EyeImage::from_fn(id, id, 240, 200, |x, y| {
            if (x + 3 * y) % 97 == 0 {
                255 // sparse highlights for the specular heuristic
            } else {
                rng.random_range(lo..=hi)
            }
        })
        .unwrap();
        let file = format!("{id}.pgm");
        write_pgm(&img, dir.join(&file)).unwrap();
        let _ = writeln!(
            manifest,
            "{id},subj-{id},{side},{file},121.5,99.0,{pupil},120.0,100.0,90.0,{}",
            mask.unwrap_or("")
        );
    };
    for i in 0..count {
        let id = format!("eye{i:02}");
        let mask = if i == 0 { Some("eye00-mask.pbm") } else { None };
        add(&id, if i % 2 == 0 { "left" } else { "right" }, 60, 200, 30.0, mask);
    }
    add("dim", "left", 10, 60, 30.0, None);
    add("wide", "right", 60, 200, 55.0, None);

    let mut mask = OcclusionMask::all_valid(128, 960);
    for r in 100..128 {
        for c in 200..500 {
            mask.set(r, c, false);
        }
    }
    write_pbm_mask(&mask, dir.join("eye00-mask.pbm")).unwrap();

    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}
