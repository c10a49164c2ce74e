//! CSV dataset manifest: one eye image per row with its segmentation circles.
//!
//! Required columns: `image_id, subject_id, eye_side, image_path, pupil_x,
//! pupil_y, pupil_r, iris_x, iris_y, iris_r`. An optional `mask_path` column
//! names a PBM occlusion mask on the normalized grid. Relative paths resolve
//! against the manifest's directory. Rows are numbered from 1, excluding the
//! header.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{EyeSide, IrisSegmentation};

const REQUIRED: [&str; 10] = [
    "image_id",
    "subject_id",
    "eye_side",
    "image_path",
    "pupil_x",
    "pupil_y",
    "pupil_r",
    "iris_x",
    "iris_y",
    "iris_r",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub subject_id: String,
    pub eye_side: EyeSide,
    pub image_path: PathBuf,
    pub segmentation: IrisSegmentation,
    pub mask_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn parse_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 10];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = column(name).ok_or_else(|| Error::Manifest {
            row: 0,
            message: format!("missing column {name:?}"),
        })?;
    }
    let mask_col = column("mask_path");

    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record?;
        let err = |message: String| Error::Manifest { row, message };
        let field = |i: usize| record.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            let name = REQUIRED[idx.iter().position(|&c| c == i).unwrap()];
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("{name} = {:?} is not a number", field(i))))
        };

        let image_id = field(idx[0]).to_owned();
        if image_id.is_empty() {
            return Err(err("empty image_id".into()));
        }
        if !seen.insert(image_id.clone()) {
            return Err(err(format!("duplicate image_id {image_id:?}")));
        }
        let eye_side = field(idx[2])
            .parse::<EyeSide>()
            .map_err(|e| err(e.to_string()))?;
        let segmentation = IrisSegmentation {
            pupil_x: num(idx[4])?,
            pupil_y: num(idx[5])?,
            pupil_radius: num(idx[6])?,
            iris_x: num(idx[7])?,
            iris_y: num(idx[8])?,
            iris_radius: num(idx[9])?,
        };
        segmentation
            .validate()
            .map_err(|e| err(e.to_string()))?;

        let image_path = resolve(field(idx[3]));
        if !image_path.is_file() {
            return Err(err(format!("image {} does not exist", image_path.display())));
        }
        let mask_path = match mask_col.map(field) {
            Some(m) if !m.is_empty() => {
                let p = resolve(m);
                if !p.is_file() {
                    return Err(err(format!("mask {} does not exist", p.display())));
                }
                Some(p)
            }
            _ => None,
        };

        entries.push(ManifestEntry {
            image_id,
            subject_id: field(idx[1]).to_owned(),
            eye_side,
            image_path,
            segmentation,
            mask_path,
        });
    }
    Ok(DatasetManifest { entries })
}
