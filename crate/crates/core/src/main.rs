use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iris_dof::io::emit::{self, LevelPairs};
use iris_dof::io::{emit_results, parse_manifest, read_moments_csv, write_moments_csv};
use iris_dof::pipeline::{
    self, check_moments, level_dir_name, load_levels, load_nir_dir, normalize_dataset,
    reference_table, save_nir_dir, NormalizeOptions, RunConfig,
};
use iris_dof::stats::{HistogramSpec, Normalization};
use iris_dof::synth::{generate, Amplitude, SynthSpec};
use iris_dof::{CompareConfig, Error, Result, SelectionCriteria};

/// Binomial degrees of freedom of iris texture from pixel-wise Hamming distances.
#[derive(Parser, Debug)]
#[command(name = "iris-dof", version)]
struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Directory that receives all output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Unwrap and select the images of a manifest into NIR1 files.
    Normalize {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Downscale a directory of NIR1 files into scale_<s>/ subdirectories.
    Pyramid {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        scales: ScaleArgs,
    },
    /// Compare all pairs in a NIR1 directory (or pyramid) into pairs.csv.
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        cmp: CompareArgs,
    },
    /// Statistics, histogram and charts from a pairs.csv.
    Stats {
        #[arg(long)]
        pairs: PathBuf,
        #[command(flatten)]
        hist: HistArgs,
    },
    /// Full run: normalize (or load), pyramid, compare, statistics.
    Sweep {
        /// Dataset manifest to normalize first.
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        manifest: Option<PathBuf>,
        /// Directory of already normalized NIR1 files.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        norm: NormArgs,
        #[command(flatten)]
        scales: ScaleArgs,
        #[command(flatten)]
        cmp: CompareArgs,
        #[command(flatten)]
        hist: HistArgs,
    },
    /// Write a synthetic set of NIR1 files.
    Synth {
        #[arg(long, default_value_t = 300)]
        count: usize,
        #[arg(long, default_value_t = 32)]
        rows: usize,
        #[arg(long, default_value_t = 240)]
        cols: usize,
        /// Gaussian correlation length in cells; 0 draws independent pixels.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Fraction of cells masked in each image.
        #[arg(long, default_value_t = 0.0)]
        occlusion: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Draw pixels from N(MU, SIGMA) clamped to [0, 1] instead of U(0, 1).
        #[arg(long, value_name = "MU,SIGMA", value_parser = parse_gaussian)]
        gaussian: Option<(f64, f64)>,
    },
    /// Degrees of freedom from a (mean, std) CSV; defaults to the bundled table.
    #[command(name = "table1-check")]
    Table1Check {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct NormArgs {
    /// Minimum median intensity (0-255) of the normalized iris.
    #[arg(long, default_value_t = 70.0)]
    min_median: f64,
    /// Maximum pupil radius in source pixels.
    #[arg(long, default_value_t = 52.0)]
    max_pupil: f64,
    #[arg(long, default_value_t = 250)]
    specular_threshold: u8,
    #[arg(long, default_value_t = 2)]
    specular_dilation: usize,
}

#[derive(Args, Debug)]
struct ScaleArgs {
    /// Strictly descending scales in (0, 1].
    #[arg(long, value_delimiter = ',', default_values_t = iris_dof::preprocess::STANDARD_SCALES)]
    scales: Vec<f64>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Match tolerance on unit-scale intensities.
    #[arg(long, default_value_t = iris_dof::compare::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = 1)]
    min_overlap: u64,
    /// Keep pairs whose images share a subject id.
    #[arg(long)]
    include_same_subject: bool,
}

#[derive(Args, Debug)]
struct HistArgs {
    /// Histogram bin width; defaults to 1/N of the fitted binomial.
    #[arg(long)]
    bin_width: Option<f64>,
    /// Plot raw counts instead of probabilities.
    #[arg(long)]
    counts: bool,
}

fn parse_gaussian(s: &str) -> std::result::Result<(f64, f64), String> {
    let (mu, sigma) = s.split_once(',').ok_or("expected MU,SIGMA")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(mu)?, num(sigma)?))
}

impl NormArgs {
    fn criteria(&self) -> SelectionCriteria {
        SelectionCriteria {
            min_median_intensity: self.min_median,
            max_pupil_radius: self.max_pupil,
        }
    }

    fn options(&self) -> NormalizeOptions {
        NormalizeOptions {
            specular_threshold: self.specular_threshold,
            specular_dilation: self.specular_dilation,
            ..Default::default()
        }
    }
}

impl CompareArgs {
    fn config(&self) -> CompareConfig {
        CompareConfig {
            tolerance: self.tolerance,
            exclude_same_subject: !self.include_same_subject,
            min_overlap: self.min_overlap,
        }
    }
}

impl HistArgs {
    fn spec(&self) -> HistogramSpec {
        HistogramSpec {
            bin_width: self.bin_width,
            normalization: if self.counts {
                Normalization::Counts
            } else {
                Normalization::Probability
            },
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.output_dir.as_path();
    match cli.command {
        Command::Normalize { manifest, norm } => {
            let manifest = parse_manifest(&manifest)?;
            let set = pipeline::with_threads(cli.threads, || {
                normalize_dataset(&manifest, &norm.criteria(), &norm.options())
            })??;
            let mut written = save_nir_dir(&set.irises, out)?;
            let path = out.join("selection.csv");
            pipeline::write_selection_csv(&set, &path)?;
            written.push(path);
            report(&written);
            println!(
                "{} accepted, {} rejected",
                set.irises.len(),
                set.rejected.len()
            );
        }
        Command::Pyramid { input, scales } => {
            let images = load_nir_dir(&input)?;
            let pyramid = pipeline::with_threads(cli.threads, || {
                pipeline::build_pyramid(&images, &scales.scales)
            })??;
            for (level, set) in &pyramid {
                let dir = out.join(level_dir_name(level.scale));
                save_nir_dir(set, &dir)?;
                println!("{}x{} -> {}", level.rows, level.cols, dir.display());
            }
        }
        Command::Compare { input, cmp } => {
            let levels = load_levels(&input)?;
            let pairs = pipeline::with_threads(cli.threads, || {
                pipeline::compare_levels(&levels, &cmp.config())
            })??;
            create_dir(out)?;
            let path = out.join(emit::PAIRS_CSV);
            emit::write_pairs_csv(&pairs, &path)?;
            report(&[path]);
        }
        Command::Stats { pairs, hist } => {
            let mut levels: Vec<LevelPairs> = emit::read_pairs_csv(&pairs)?;
            levels.sort_by(|a, b| b.level.scale.total_cmp(&a.level.scale));
            let table = pipeline::table_for(&levels)?;
            let files = emit_results(&levels, &table.rows, &hist.spec(), out)?;
            report(&files.written);
            print_table(&table.rows);
        }
        Command::Sweep {
            manifest,
            input,
            norm,
            scales,
            cmp,
            hist,
        } => {
            let config = RunConfig {
                criteria: norm.criteria(),
                compare: cmp.config(),
                normalize: norm.options(),
                histogram: hist.spec(),
                scales: scales.scales,
                output_dir: out.to_path_buf(),
                threads: cli.threads,
                ..Default::default()
            };
            config.validate()?;
            let images = match (manifest, input) {
                (Some(m), _) => {
                    let manifest = parse_manifest(&m)?;
                    let set = pipeline::with_threads(cli.threads, || {
                        normalize_dataset(&manifest, &config.criteria, &config.normalize)
                    })??;
                    create_dir(out)?;
                    pipeline::write_selection_csv(&set, &out.join("selection.csv"))?;
                    set.irises
                }
                (None, Some(dir)) => load_nir_dir(&dir)?,
                (None, None) => return Err(Error::InvalidArgument("--manifest or --input".into())),
            };
            let (outcome, files) = pipeline::run_sweep(&images, &config)?;
            report(&files.written);
            print_table(&outcome.table.rows);
        }
        Command::Synth {
            count,
            rows,
            cols,
            sigma,
            occlusion,
            seed,
            gaussian,
        } => {
            let spec = SynthSpec {
                count,
                rows,
                cols,
                amplitude: match gaussian {
                    Some((mu, sigma)) => Amplitude::Gaussian { mu, sigma },
                    None => Amplitude::Uniform01,
                },
                correlation_sigma: sigma,
                occlusion_fraction: occlusion,
                seed,
            };
            for w in spec.validate()? {
                log::warn!("{w}");
            }
            let set = pipeline::with_threads(cli.threads, || generate(&spec))??;
            save_nir_dir(&set, out)?;
            println!("wrote {} images to {}", set.len(), out.display());
        }
        Command::Table1Check { input } => {
            let rows = match input {
                Some(p) => read_moments_csv(&p)?,
                None => reference_table(),
            };
            let checked = check_moments(&rows)?;
            for (m, real, dof) in &checked {
                let label = m.scale.map(|s| format!("{s}")).unwrap_or_else(|| "-".into());
                println!(
                    "scale {label:>5}  mean {:.9}  std {:.9}  dof {real:.3} -> {dof}",
                    m.mean, m.std
                );
            }
            create_dir(out)?;
            let path = out.join("dof_check.csv");
            write_moments_csv(&checked, &path)?;
            report(&[path]);
        }
    }
    Ok(())
}

fn print_table(rows: &[iris_dof::stats::SweepRow]) {
    for r in rows {
        let dof = r.stats.dof.map_or_else(|| "undefined".to_string(), |d| d.to_string());
        println!(
            "{:>4}x{:<4} pairs {:>8}  mean {:.9}  std {:.9}  dof {dof}",
            r.level.rows, r.level.cols, r.stats.n_pairs, r.stats.mean, r.stats.std
        );
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
