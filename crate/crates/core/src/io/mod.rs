//! File formats: NIR1 normalized-iris containers, PGM/PBM images, dataset
//! manifests, and result emission (CSV and SVG).

pub mod emit;
pub mod manifest;
pub mod nir;
pub mod pnm;
mod svg;

pub use emit::{
    emit_results, format_sig, parse_moments_csv, read_moments_csv, read_pairs_csv, write_moments_csv, write_pairs_csv,
    write_stats_csv,
    EmittedFiles, LevelPairs, MomentsRow,
};
pub use manifest::{parse_manifest, DatasetManifest, ManifestEntry};
pub use nir::{decode_nir, encode_nir, load_nir, save_nir};
pub use pnm::{read_pbm_mask, read_pgm, write_pbm_mask, write_pgm};
