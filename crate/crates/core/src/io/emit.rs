//! CSV and SVG result files.
//!
//! Real-valued CSV fields carry 9 significant digits; integer fields are
//! printed exactly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::compare::PairResult;
use crate::error::{Error, Result};
use crate::preprocess::ResolutionLevel;
use crate::stats::{histogram_with_overlay, HistogramOverlay, HistogramSpec, SweepRow};

use super::svg;

pub const PAIRS_CSV: &str = "pairs.csv";
pub const STATS_CSV: &str = "stats.csv";
pub const HISTOGRAM_CSV: &str = "histogram.csv";
pub const HISTOGRAM_SVG: &str = "histogram.svg";
pub const DOF_SVG: &str = "dof_vs_resolution.svg";

/// Pair results computed at one resolution level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPairs {
    pub level: ResolutionLevel,
    pub pairs: Vec<PairResult>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmittedFiles {
    pub written: Vec<PathBuf>,
}

/// `v` with 9 significant digits in positional notation.
pub fn format_sig(v: f64) -> String {
    const SIG: i32 = 9;
    if v == 0.0 {
        return "0".to_owned();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // Exponent after rounding to SIG digits.
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (SIG - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_pairs_csv(levels: &[LevelPairs], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "scale", "rows", "cols", "id_a", "id_b", "overlap", "mismatches", "hamming",
    ])?;
    for lp in levels {
        let (scale, rows, cols) = (
            format_sig(lp.level.scale),
            lp.level.rows.to_string(),
            lp.level.cols.to_string(),
        );
        for p in &lp.pairs {
            w.write_record([
                scale.as_str(),
                rows.as_str(),
                cols.as_str(),
                p.id_a.as_str(),
                p.id_b.as_str(),
                &p.overlap.to_string(),
                &p.mismatches.to_string(),
                &format_sig(p.hamming),
            ])?;
        }
    }
    finish(w, path)
}

fn table_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Table {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn header_index(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| table_err(path, 0, format!("missing column `{name}`")))
}

fn field<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse()
        .map_err(|_| table_err(path, row, format!("bad `{name}` value {raw:?}")))
}

/// Reads a file produced by [`write_pairs_csv`], grouping rows into levels in
/// order of first appearance. Hamming distances are recomputed from the exact
/// counts rather than taken from the rounded text.
pub fn read_pairs_csv(path: &Path) -> Result<Vec<LevelPairs>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers()?.clone();
    let col = |n| header_index(path, &headers, n);
    let (ks, kr, kc, ka, kb, ko, km) = (
        col("scale")?,
        col("rows")?,
        col("cols")?,
        col("id_a")?,
        col("id_b")?,
        col("overlap")?,
        col("mismatches")?,
    );
    let mut levels: Vec<LevelPairs> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let level = ResolutionLevel {
            scale: field(path, row, &rec, ks, "scale")?,
            rows: field(path, row, &rec, kr, "rows")?,
            cols: field(path, row, &rec, kc, "cols")?,
        };
        let overlap: u64 = field(path, row, &rec, ko, "overlap")?;
        let mismatches: u64 = field(path, row, &rec, km, "mismatches")?;
        if overlap == 0 || mismatches > overlap {
            return Err(table_err(
                path,
                row,
                format!("counts {mismatches}/{overlap} are not a valid distance"),
            ));
        }
        let pair = PairResult {
            id_a: rec.get(ka).unwrap_or("").to_owned(),
            id_b: rec.get(kb).unwrap_or("").to_owned(),
            overlap,
            mismatches,
            hamming: mismatches as f64 / overlap as f64,
        };
        match levels.iter_mut().find(|l| l.level == level) {
            Some(l) => l.pairs.push(pair),
            None => levels.push(LevelPairs {
                level,
                pairs: vec![pair],
            }),
        }
    }
    Ok(levels)
}

/// One `(label, mean, std)` row of a published moments table.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentsRow {
    pub scale: Option<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Reads a CSV with `mean` and `std` columns and an optional `scale` column.
pub fn read_moments_csv(path: &Path) -> Result<Vec<MomentsRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_moments_csv(file, path)
}

/// Like [`read_moments_csv`] for any reader; `label` names the source in errors.
pub fn parse_moments_csv(reader: impl std::io::Read, label: &Path) -> Result<Vec<MomentsRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let km = header_index(label, &headers, "mean")?;
    let kd = header_index(label, &headers, "std")?;
    let ks = header_index(label, &headers, "scale").ok();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        out.push(MomentsRow {
            scale: ks.map(|k| field(label, row, &rec, k, "scale")).transpose()?,
            mean: field(label, row, &rec, km, "mean")?,
            std: field(label, row, &rec, kd, "std")?,
        });
    }
    Ok(out)
}

/// Writes `(scale, mean, std, dof_real, dof)` lines for a moments table.
pub fn write_moments_csv(rows: &[(MomentsRow, f64, u64)], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scale", "mean", "std", "dof_real", "dof"])?;
    for (m, real, dof) in rows {
        w.write_record([
            m.scale.map(format_sig).unwrap_or_default(),
            format_sig(m.mean),
            format_sig(m.std),
            format_sig(*real),
            dof.to_string(),
        ])?;
    }
    finish(w, path)
}

/// Writes the sweep table: one line per level, descending scale.
pub fn write_stats_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "scale", "rows", "cols", "n_pairs", "mean", "std", "dof_real", "dof",
    ])?;
    for r in rows {
        let s = &r.stats;
        w.write_record([
            format_sig(r.level.scale),
            r.level.rows.to_string(),
            r.level.cols.to_string(),
            s.n_pairs.to_string(),
            format_sig(s.mean),
            format_sig(s.std),
            s.dof_real.map(format_sig).unwrap_or_default(),
            s.dof.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    finish(w, path)
}

pub fn write_histogram_csv(h: &HistogramOverlay, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bin_left", "count", "overlay_mass"])?;
    for b in &h.bins {
        w.write_record([format_sig(b.left), b.count.to_string(), format_sig(b.overlay)])?;
    }
    finish(w, path)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes pairs, the sweep table, the histogram of the highest-resolution
/// level with its binomial overlay, and the degrees-of-freedom chart.
///
/// Fails without writing anything when there are no pairs at all. When the
/// top level's distribution is degenerate, the CSV tables are still written
/// and a degenerate-distribution error is returned for the histogram.
pub fn emit_results(
    levels: &[LevelPairs],
    sweep: &[SweepRow],
    histogram: &HistogramSpec,
    output_dir: &Path,
) -> Result<EmittedFiles> {
    let Some(top) = levels.iter().find(|l| !l.pairs.is_empty()) else {
        return Err(Error::DegenerateDistribution(
            "no pair results to emit".into(),
        ));
    };
    fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let mut out = EmittedFiles::default();

    let path = output_dir.join(PAIRS_CSV);
    write_pairs_csv(levels, &path)?;
    out.written.push(path);

    let path = output_dir.join(STATS_CSV);
    write_stats_csv(sweep, &path)?;
    out.written.push(path);

    let path = output_dir.join(DOF_SVG);
    write_text(&path, &svg::dof_vs_resolution(sweep))?;
    out.written.push(path);

    let top_stats = sweep
        .iter()
        .find(|r| r.level == top.level)
        .map(|r| r.stats)
        .ok_or_else(|| {
            Error::DegenerateDistribution(format!(
                "no statistics for scale {}",
                top.level.scale
            ))
        })?;
    let h = histogram_with_overlay(&top.pairs, &top_stats, histogram)?;
    let path = output_dir.join(HISTOGRAM_CSV);
    write_histogram_csv(&h, &path)?;
    out.written.push(path);

    let title = format!(
        "Imposter histogram, {}x{} ({} pairs, N = {})",
        top.level.rows,
        top.level.cols,
        top.pairs.len(),
        h.model.trials()
    );
    let path = output_dir.join(HISTOGRAM_SVG);
    write_text(&path, &svg::histogram(&h, &title))?;
    out.written.push(path);
    Ok(out)
}
