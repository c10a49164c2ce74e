//! Inherent binomial degrees of freedom of iris-like textures.
//!
//! The pipeline unwraps each eye image into a fixed polar grid, normalizes
//! its median intensity, compares every imposter pair pixel by pixel under a
//! strict intensity tolerance, and fits a binomial model to the resulting
//! Hamming-distance distribution. Repeating the comparison on downscaled
//! copies yields degrees of freedom as a function of resolution.
//!
//! ```
//! use iris_dof::stats::estimate_dof;
//!
//! let (dof_real, dof) = estimate_dof(0.973508055, 0.006933829).unwrap();
//! assert_eq!(dof, 536);
//! assert!((dof_real - 536.42).abs() < 0.01);
//! ```

pub mod compare;
pub mod error;
pub mod io;
pub mod model;
pub mod normalize;
pub mod pipeline;
pub mod preprocess;
pub mod stats;
pub mod synth;

pub use compare::{all_pairs, hamming_pair, pixels_match, CompareConfig, PairResult, PairSet};
pub use error::{Error, Result};
pub use model::{EyeImage, EyeSide, IrisSegmentation, NormalizedIris, OcclusionMask};
pub use normalize::{attach_mask, specular_mask_heuristic, unwrap};
pub use preprocess::{downscale, normalize_intensity, select_images, ResolutionLevel, SelectionCriteria};
pub use stats::{
    binomial_pmf, estimate_dof, histogram_with_overlay, imposter_stats, sweep_table,
    BinomialModel, HistogramSpec, ImposterStats, SweepRow,
};
pub use synth::{Amplitude, SynthSpec};
