//! Command-line front end. Every subcommand resolves its flags into a
//! [`RunConfig`], runs the corresponding library pipeline, and writes
//! machine-readable artifacts that embed that resolved config, so any
//! artifact can be reproduced from the config it carries.
//!
//! Reproducibility contract: with equal configs and seeds, artifacts are
//! byte-identical across reruns and across `--workers` settings (the worker
//! count is deliberately not part of [`RunConfig`]). JSON is the canonical
//! output; `--format csv` additionally writes CSV projections whose floats
//! are fixed at 12 significant digits.
//!
//! Exit codes: 0 on success, 1 for computational/IO failures, 2 for
//! usage and config errors (including a missing input path).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{
    build_dataset_index, corpus_noise_stats, extract_samples, grouped_cv, kfold_cv_samples,
    noise_benchmark, train_size_sweep, ClassificationReport, Metric, NoiseBenchReport, SweepReport,
};
use crate::error::{Error, Result};
use crate::fusion::{extract, BlockSelection, ExtractorConfig};
use crate::io::load_image;
use crate::noise::expected_channel_effect;
use crate::opcount::{measure_ops, AuxCounters, OpCounters, OperatorKind};
use crate::raster::{mean_plane, window_grid, GrayPlane, OperatorParams, RgbImage};
use crate::sps::{significance_mask, LsvMode};
use crate::synth::{write_corpus, SynthSpec, CLASS_NAMES};

/// Environment variable consulted for the default output directory (and
/// nothing else).
pub const OUT_DIR_ENV: &str = "HCLBP_OUT_DIR";

const DEFAULT_OUT_DIR: &str = "hclbp-out";

/// Artifact format. JSON is canonical and always written; `csv` adds a
/// comma-separated projection of each tabular artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// The fully-resolved settings of one run, echoed verbatim into every
/// artifact the run writes. Defaults are documented on the corresponding
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Descriptor extraction for a single image or a dataset root.
    Extract {
        input: PathBuf,
        crop: Option<u32>,
        extractor: ExtractorConfig,
        format: OutputFormat,
        out_dir: PathBuf,
    },
    /// Cross-validated k-NN classification, a leave-one-group-out run, or a
    /// train-size sweep (when `train_fractions` is non-empty).
    Classify {
        input: PathBuf,
        crop: Option<u32>,
        extractor: ExtractorConfig,
        metric: Metric,
        folds: usize,
        ks: Vec<usize>,
        train_fractions: Vec<f64>,
        grouped: bool,
        seed: u64,
        format: OutputFormat,
        out_dir: PathBuf,
    },
    /// Channel-corruption statistics plus per-(variant, ratio) accuracy
    /// under impulse noise.
    NoiseBench {
        input: PathBuf,
        crop: Option<u32>,
        schedule: Vec<OperatorParams>,
        lsv_mode: LsvMode,
        variants: Vec<String>,
        ratios: Vec<f64>,
        folds: usize,
        k: usize,
        metric: Metric,
        noise_train: bool,
        seed: u64,
        format: OutputFormat,
        out_dir: PathBuf,
    },
    /// Predicted vs measured arithmetic-operation counts.
    Opcount {
        input: Option<PathBuf>,
        size: Option<u32>,
        schedule: Vec<OperatorParams>,
        sps: bool,
        lsv_mode: LsvMode,
        seed: u64,
        format: OutputFormat,
        out_dir: PathBuf,
    },
    /// Synthetic four-class corpus generation.
    Synth {
        dest: PathBuf,
        width: u32,
        height: u32,
        per_class: usize,
        seed: u64,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "hclbp",
    version,
    about = "Noise-resistant color-texture descriptors: extraction, significant-point \
             selection, k-NN benchmarks, impulse-noise studies, and operation counting"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores). Artifacts
    /// never depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract descriptors for one image or a class-per-directory dataset.
    Extract(ExtractArgs),
    /// Classify a dataset: stratified k-fold CV, grouped splits, or a
    /// train-size sweep.
    Classify(ClassifyArgs),
    /// Measure channel corruption and classification accuracy under
    /// impulse noise.
    NoiseBench(NoiseBenchArgs),
    /// Count arithmetic operations, predicted and measured.
    Opcount(OpcountArgs),
    /// Generate the synthetic four-class corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory (default: $HCLBP_OUT_DIR, then ./hclbp-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// json (canonical) or csv (adds CSV projections next to the JSON).
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,
}

impl OutArgs {
    fn resolve(self) -> (OutputFormat, PathBuf) {
        (self.format, resolve_out_dir(self.out_dir, std::env::var_os(OUT_DIR_ENV)))
    }
}

fn resolve_out_dir(flag: Option<PathBuf>, env: Option<std::ffi::OsString>) -> PathBuf {
    flag.or_else(|| env.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

#[derive(Debug, Args)]
struct ExtractorArgs {
    /// Ring schedule: P,R pairs separated by ';' (e.g. "8,1;16,2").
    #[arg(long, value_delimiter = ';', default_value = "8,1;16,2", value_parser = parse_ring)]
    schedule: Vec<OperatorParams>,
    /// Histogram blocks per ring: full (per-plane + fused), per-plane, fused.
    #[arg(long, default_value = "full", value_parser = parse_blocks)]
    blocks: BlockSelection,
    /// Keep only significant points (local significance above the global mean).
    #[arg(long)]
    sps: bool,
    /// Local significance aggregation: absolute or signed differences.
    #[arg(long = "lsv", default_value = "absolute", value_parser = parse_lsv)]
    lsv_mode: LsvMode,
}

impl ExtractorArgs {
    fn into_config(self) -> ExtractorConfig {
        ExtractorConfig {
            schedule: self.schedule,
            blocks: self.blocks,
            sps: self.sps,
            lsv_mode: self.lsv_mode,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// A png/ppm image, or a dataset root with one directory per class.
    input: PathBuf,
    /// Tile images into non-overlapping crop x crop windows, one sample each.
    #[arg(long)]
    crop: Option<u32>,
    #[command(flatten)]
    extractor: ExtractorArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Dataset root with one directory per class.
    input: PathBuf,
    /// Tile images into non-overlapping crop x crop windows, one sample each.
    #[arg(long)]
    crop: Option<u32>,
    #[command(flatten)]
    extractor: ExtractorArgs,
    /// Descriptor distance: l2 or chi-square.
    #[arg(long, default_value = "l2", value_parser = parse_metric)]
    metric: Metric,
    /// Cross-validation fold count.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Neighbor counts to evaluate, comma-separated (one report per k).
    #[arg(long = "k", value_delimiter = ',', default_value = "1")]
    ks: Vec<usize>,
    /// Run a train-size sweep over these fractions (inside (0,1)) instead
    /// of cross-validation.
    #[arg(long = "train-fractions", value_delimiter = ',')]
    train_fractions: Vec<f64>,
    /// Leave-one-group-out instead of k-fold (needs nested class dirs).
    #[arg(long)]
    grouped: bool,
    /// Seed for fold assignment and sweep splits.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct NoiseBenchArgs {
    /// Dataset root with one directory per class.
    input: PathBuf,
    /// Tile images into non-overlapping crop x crop windows, one sample each.
    #[arg(long)]
    crop: Option<u32>,
    /// Ring schedule shared by all variants: P,R pairs separated by ';'.
    #[arg(long, value_delimiter = ';', default_value = "8,1;16,2", value_parser = parse_ring)]
    schedule: Vec<OperatorParams>,
    /// Local significance aggregation for "+sps" variants.
    #[arg(long = "lsv", default_value = "absolute", value_parser = parse_lsv)]
    lsv_mode: LsvMode,
    /// Extractor variants to compare: per-plane, fused, or full, each
    /// optionally with a "+sps" suffix.
    #[arg(long, value_delimiter = ',', default_value = "per-plane,full,full+sps")]
    variants: Vec<String>,
    /// Impulse-noise ratios to evaluate (0 reproduces the clean run).
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3,0.4")]
    ratios: Vec<f64>,
    /// Cross-validation fold count.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Neighbor count for classification.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Descriptor distance: l2 or chi-square.
    #[arg(long, default_value = "l2", value_parser = parse_metric)]
    metric: Metric,
    /// Train on clean descriptors and classify noisy queries (default:
    /// every image is noisy, training folds included).
    #[arg(long)]
    train_clean: bool,
    /// Seed for noise streams and fold assignment.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OpcountArgs {
    /// Image to instrument; omit and pass --size for a seeded synthetic one.
    input: Option<PathBuf>,
    /// Instrument a seeded random size x size image instead of a file.
    #[arg(long)]
    size: Option<u32>,
    /// Ring schedule: P,R pairs separated by ';'.
    #[arg(long, value_delimiter = ';', default_value = "8,1;16,2", value_parser = parse_ring)]
    schedule: Vec<OperatorParams>,
    /// Count under a significant-points selection mask.
    #[arg(long)]
    sps: bool,
    /// Local significance aggregation when --sps is on.
    #[arg(long = "lsv", default_value = "absolute", value_parser = parse_lsv)]
    lsv_mode: LsvMode,
    /// Seed for the synthetic probe image.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write the corpus into (one subdirectory per class).
    dest: PathBuf,
    #[arg(long, default_value_t = 128)]
    width: u32,
    #[arg(long, default_value_t = 128)]
    height: u32,
    /// Images per class.
    #[arg(long = "per-class", default_value_t = 25)]
    per_class: usize,
    /// Seed for image generation.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_ring(s: &str) -> std::result::Result<OperatorParams, String> {
    let (p, r) = s.split_once(',').ok_or_else(|| format!("ring `{s}` is not of the form P,R"))?;
    let p: u32 = p.trim().parse().map_err(|e| format!("bad neighbor count in `{s}`: {e}"))?;
    let r: u32 = r.trim().parse().map_err(|e| format!("bad radius in `{s}`: {e}"))?;
    OperatorParams::new(p, r).map_err(|e| e.to_string())
}

fn parse_blocks(s: &str) -> std::result::Result<BlockSelection, String> {
    match s {
        "full" => Ok(BlockSelection::Full),
        "per-plane" => Ok(BlockSelection::PerPlane),
        "fused" => Ok(BlockSelection::FusedOnly),
        _ => Err(format!("unknown blocks `{s}` (expected full, per-plane, or fused)")),
    }
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    match s {
        "l2" => Ok(Metric::L2),
        "chi-square" => Ok(Metric::ChiSquare),
        _ => Err(format!("unknown metric `{s}` (expected l2 or chi-square)")),
    }
}

fn parse_lsv(s: &str) -> std::result::Result<LsvMode, String> {
    match s {
        "absolute" => Ok(LsvMode::Absolute),
        "signed" => Ok(LsvMode::Signed),
        _ => Err(format!("unknown lsv mode `{s}` (expected absolute or signed)")),
    }
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        _ => Err(format!("unknown format `{s}` (expected json or csv)")),
    }
}

impl Command {
    /// Resolve parsed flags (plus the environment default for the output
    /// directory) into the config that gets echoed into artifacts.
    pub fn resolve(self) -> RunConfig {
        match self {
            Command::Extract(a) => {
                let (format, out_dir) = a.out.resolve();
                RunConfig::Extract {
                    input: a.input,
                    crop: a.crop,
                    extractor: a.extractor.into_config(),
                    format,
                    out_dir,
                }
            }
            Command::Classify(a) => {
                let (format, out_dir) = a.out.resolve();
                RunConfig::Classify {
                    input: a.input,
                    crop: a.crop,
                    extractor: a.extractor.into_config(),
                    metric: a.metric,
                    folds: a.folds,
                    ks: a.ks,
                    train_fractions: a.train_fractions,
                    grouped: a.grouped,
                    seed: a.seed,
                    format,
                    out_dir,
                }
            }
            Command::NoiseBench(a) => {
                let (format, out_dir) = a.out.resolve();
                RunConfig::NoiseBench {
                    input: a.input,
                    crop: a.crop,
                    schedule: a.schedule,
                    lsv_mode: a.lsv_mode,
                    variants: a.variants,
                    ratios: a.ratios,
                    folds: a.folds,
                    k: a.k,
                    metric: a.metric,
                    noise_train: !a.train_clean,
                    seed: a.seed,
                    format,
                    out_dir,
                }
            }
            Command::Opcount(a) => {
                let (format, out_dir) = a.out.resolve();
                RunConfig::Opcount {
                    input: a.input,
                    size: a.size,
                    schedule: a.schedule,
                    sps: a.sps,
                    lsv_mode: a.lsv_mode,
                    seed: a.seed,
                    format,
                    out_dir,
                }
            }
            Command::Synth(a) => RunConfig::Synth {
                dest: a.dest,
                width: a.width,
                height: a.height,
                per_class: a.per_class,
                seed: a.seed,
            },
        }
    }
}

/// Binary entry point: parse, set up the worker pool, dispatch, map errors
/// to exit codes (usage/config errors exit 2, everything else 1).
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        // Failure only means a global pool already exists; outputs are
        // worker-count-independent either way.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build_global();
    }
    match run(cli.command) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

/// Resolve and dispatch one parsed command; returns the artifact paths.
pub fn run(command: Command) -> Result<Vec<PathBuf>> {
    dispatch(&command.resolve())
}

/// Execute a resolved config (each `cmd_*` checks it got its own variant).
pub fn dispatch(config: &RunConfig) -> Result<Vec<PathBuf>> {
    match config {
        RunConfig::Extract { .. } => cmd_extract(config),
        RunConfig::Classify { .. } => cmd_classify(config),
        RunConfig::NoiseBench { .. } => cmd_noise_bench(config),
        RunConfig::Opcount { .. } => cmd_opcount(config),
        RunConfig::Synth { .. } => cmd_synth(config),
    }
}

fn wrong_variant(expected: &str) -> Error {
    Error::BadConfig(format!("config does not belong to the {expected} command"))
}

/// A missing input is a usage error (exit 2), not an I/O failure.
fn check_input(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::BadConfig(format!("input path {} does not exist", path.display())))
    }
}

// ---------------------------------------------------------------------------
// Artifact plumbing
// ---------------------------------------------------------------------------

/// Format one float for CSV projections: 12 significant digits, always
/// scientific — stable and precise enough for byte-reproducibility without
/// leaking shortest-representation quirks into diffs.
fn csv_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|source| Error::Io { path: parent.to_owned(), source })?;
        }
    }
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn write_json_artifact<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = out_dir.join(name);
    let mut json = serde_json::to_string_pretty(value).expect("artifact serializes");
    json.push('\n');
    write_text(&path, &json)?;
    Ok(path)
}

/// CSV projection: a `# run_config:` comment line (compact JSON), a header,
/// then rows. Cells are comma-joined without quoting; ids and class names
/// come from file stems, which the indexer keeps comma-free.
fn write_csv_artifact(
    out_dir: &Path,
    name: &str,
    config: &RunConfig,
    header: &str,
    rows: &[String],
) -> Result<PathBuf> {
    let path = out_dir.join(name);
    let mut text = format!(
        "# run_config: {}\n{header}\n",
        serde_json::to_string(config).expect("config serializes")
    );
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_text(&path, &text)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

/// One extracted descriptor. `class` is the class-directory name, or empty
/// for single-image extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    pub id: String,
    pub class: String,
    pub bins: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ExtractArtifact<'a> {
    run_config: &'a RunConfig,
    classes: Vec<String>,
    rows: Vec<DescriptorRow>,
}

/// Extract descriptors for a single image (tiled if `crop` is set) or a
/// dataset root; writes `descriptors.json` (+ `.csv`), rows ordered by id.
pub fn cmd_extract(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let RunConfig::Extract { input, crop, extractor, format, out_dir } = config else {
        return Err(wrong_variant("extract"));
    };
    check_input(input)?;
    extractor.validate()?;

    let (classes, mut rows) = if input.is_file() {
        let image = load_image(input)?;
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into());
        let mut rows = Vec::new();
        match crop {
            None => {
                let d = extract(&image, extractor)?;
                rows.push(DescriptorRow { id: stem, class: String::new(), bins: d.bins });
            }
            Some(size) => {
                let (cols, grid_rows) = window_grid(image.width(), image.height(), *size, *size)?;
                for i in 0..cols * grid_rows {
                    let window = image.crop((i % cols) * size, (i / cols) * size, *size, *size)?;
                    let d = extract(&window, extractor)?;
                    rows.push(DescriptorRow {
                        id: format!("{stem}#{i:02}"),
                        class: String::new(),
                        bins: d.bins,
                    });
                }
            }
        }
        (Vec::new(), rows)
    } else {
        let index = build_dataset_index(input, *crop)?;
        let samples = extract_samples(&index, extractor, None)?;
        let rows = samples
            .into_iter()
            .map(|s| DescriptorRow {
                id: s.id,
                class: index.classes[s.class].clone(),
                bins: s.bins,
            })
            .collect();
        (index.classes, rows)
    };
    rows.sort_by(|a, b| a.id.cmp(&b.id));

    let artifact = ExtractArtifact { run_config: config, classes, rows };
    let mut written = vec![write_json_artifact(out_dir, "descriptors.json", &artifact)?];
    if *format == OutputFormat::Csv {
        let mut header = String::from("id,class");
        for i in 0..extractor.descriptor_len() {
            header.push_str(&format!(",b{i}"));
        }
        let rows: Vec<String> = artifact
            .rows
            .iter()
            .map(|r| {
                let bins: Vec<String> = r.bins.iter().map(|&b| csv_float(b)).collect();
                format!("{},{},{}", r.id, r.class, bins.join(","))
            })
            .collect();
        written.push(write_csv_artifact(out_dir, "descriptors.csv", config, &header, &rows)?);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct ClassifyArtifact<'a> {
    run_config: &'a RunConfig,
    reports: Vec<ClassificationReport>,
}

#[derive(Debug, Serialize)]
struct SweepArtifact<'a> {
    run_config: &'a RunConfig,
    report: SweepReport,
}

fn cache_path(out_dir: &Path, extractor: &ExtractorConfig) -> PathBuf {
    out_dir.join("cache").join(format!("descriptors-{}.csv", extractor.config_hash()))
}

/// Classify a dataset root; writes `classification.json` (one report per k)
/// or `sweep.json` when train fractions are given, plus CSV projections on
/// request. Descriptors are cached under `<out_dir>/cache/`.
pub fn cmd_classify(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let RunConfig::Classify {
        input,
        crop,
        extractor,
        metric,
        folds,
        ks,
        train_fractions,
        grouped,
        seed,
        format,
        out_dir,
    } = config
    else {
        return Err(wrong_variant("classify"));
    };
    check_input(input)?;
    if ks.is_empty() {
        return Err(Error::BadConfig("need at least one k".into()));
    }
    let index = build_dataset_index(input, *crop)?;
    let samples = extract_samples(&index, extractor, Some(&cache_path(out_dir, extractor)))?;

    if !train_fractions.is_empty() {
        let report = train_size_sweep(
            &samples,
            &index.classes,
            train_fractions,
            ks,
            *metric,
            *seed,
            extractor,
        )?;
        let artifact = SweepArtifact { run_config: config, report };
        let mut written = vec![write_json_artifact(out_dir, "sweep.json", &artifact)?];
        if *format == OutputFormat::Csv {
            let rows: Vec<String> = artifact
                .report
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{}",
                        csv_float(r.fraction),
                        r.k,
                        r.train_size,
                        r.test_size,
                        csv_float(r.accuracy)
                    )
                })
                .collect();
            written.push(write_csv_artifact(
                out_dir,
                "sweep.csv",
                config,
                "fraction,k,train_size,test_size,accuracy",
                &rows,
            )?);
        }
        return Ok(written);
    }

    let reports: Vec<ClassificationReport> = ks
        .iter()
        .map(|&k| {
            if *grouped {
                grouped_cv(&samples, &index, k, *metric, extractor)
            } else {
                kfold_cv_samples(&samples, &index.classes, *folds, k, *metric, *seed, extractor)
            }
        })
        .collect::<Result<_>>()?;

    let artifact = ClassifyArtifact { run_config: config, reports };
    let mut written = vec![write_json_artifact(out_dir, "classification.json", &artifact)?];
    if *format == OutputFormat::Csv {
        let first = &artifact.reports[0];
        let mut header = String::from("k,accuracy");
        for class in &first.classes {
            header.push_str(&format!(",class_{class}"));
        }
        for i in 0..first.fold_accuracies.len() {
            header.push_str(&format!(",fold_{i}"));
        }
        let rows: Vec<String> = artifact
            .reports
            .iter()
            .map(|r| {
                let mut row = format!("{},{}", r.protocol.k, csv_float(r.accuracy));
                for &a in &r.per_class {
                    row.push_str(&format!(",{}", csv_float(a)));
                }
                for &a in &r.fold_accuracies {
                    row.push_str(&format!(",{}", csv_float(a)));
                }
                row
            })
            .collect();
        written.push(write_csv_artifact(out_dir, "classification.csv", config, &header, &rows)?);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// noise-bench
// ---------------------------------------------------------------------------

/// Observed corruption of one ratio across the corpus, next to the
/// analytic distribution. Fractions are `None` when nothing changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStatsRow {
    pub ratio: f64,
    pub total_noisy: u64,
    /// Pixels with exactly 1, 2, and 3 corrupted planes.
    pub counts: [u64; 3],
    pub observed: Option<[f64; 3]>,
    pub expected: Option<[f64; 3]>,
}

#[derive(Debug, Serialize)]
struct NoiseStatsArtifact<'a> {
    run_config: &'a RunConfig,
    rows: Vec<NoiseStatsRow>,
}

#[derive(Debug, Serialize)]
struct NoiseAccuracyArtifact<'a> {
    run_config: &'a RunConfig,
    report: NoiseBenchReport,
}

/// Build one named variant's extractor: `per-plane`, `fused`, or `full`,
/// with an optional `+sps` suffix.
pub fn variant_config(
    name: &str,
    schedule: &[OperatorParams],
    lsv_mode: LsvMode,
) -> Result<ExtractorConfig> {
    let (base, sps) = match name.strip_suffix("+sps") {
        Some(base) => (base, true),
        None => (name, false),
    };
    let blocks = parse_blocks(base).map_err(Error::BadConfig)?;
    Ok(ExtractorConfig { schedule: schedule.to_vec(), blocks, sps, lsv_mode })
}

/// Run the impulse-noise study; writes `noise_stats.json` (per-ratio
/// channel-corruption tallies with the analytic comparison columns) and
/// `noise_accuracy.json` (per-(variant, ratio) cross-validated accuracy),
/// plus CSV projections on request.
pub fn cmd_noise_bench(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let RunConfig::NoiseBench {
        input,
        crop,
        schedule,
        lsv_mode,
        variants,
        ratios,
        folds,
        k,
        metric,
        noise_train,
        seed,
        format,
        out_dir,
    } = config
    else {
        return Err(wrong_variant("noise-bench"));
    };
    check_input(input)?;
    let extractors: Vec<(String, ExtractorConfig)> = variants
        .iter()
        .map(|name| Ok((name.clone(), variant_config(name, schedule, *lsv_mode)?)))
        .collect::<Result<_>>()?;
    let index = build_dataset_index(input, *crop)?;

    let mut stats_rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let stats = corpus_noise_stats(&index, ratio, *seed)?;
        let expected = if ratio > 0.0 { Some(expected_channel_effect(ratio)?) } else { None };
        stats_rows.push(NoiseStatsRow {
            ratio,
            total_noisy: stats.total_noisy,
            counts: stats.counts,
            observed: stats.fractions(),
            expected,
        });
    }
    let report =
        noise_benchmark(&index, &extractors, ratios, *folds, *k, *metric, *seed, *noise_train)?;

    let stats_artifact = NoiseStatsArtifact { run_config: config, rows: stats_rows };
    let accuracy_artifact = NoiseAccuracyArtifact { run_config: config, report };
    let mut written = vec![
        write_json_artifact(out_dir, "noise_stats.json", &stats_artifact)?,
        write_json_artifact(out_dir, "noise_accuracy.json", &accuracy_artifact)?,
    ];
    if *format == OutputFormat::Csv {
        let opt = |v: Option<[f64; 3]>, i: usize| match v {
            Some(f) => csv_float(f[i]),
            None => String::new(),
        };
        let rows: Vec<String> = stats_artifact
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    csv_float(r.ratio),
                    r.total_noisy,
                    r.counts[0],
                    r.counts[1],
                    r.counts[2],
                    opt(r.observed, 0),
                    opt(r.observed, 1),
                    opt(r.observed, 2),
                    opt(r.expected, 0),
                    opt(r.expected, 1),
                    opt(r.expected, 2),
                )
            })
            .collect();
        written.push(write_csv_artifact(
            out_dir,
            "noise_stats.csv",
            config,
            "ratio,total_noisy,one_plane,two_planes,three_planes,\
             observed_one,observed_two,observed_three,\
             expected_one,expected_two,expected_three",
            &rows,
        )?);

        let mut header = String::from("extractor,ratio,accuracy");
        for i in 0..*folds {
            header.push_str(&format!(",fold_{i}"));
        }
        let rows: Vec<String> = accuracy_artifact
            .report
            .rows
            .iter()
            .map(|r| {
                let mut row =
                    format!("{},{},{}", r.extractor, csv_float(r.ratio), csv_float(r.accuracy));
                for &a in &r.fold_accuracies {
                    row.push_str(&format!(",{}", csv_float(a)));
                }
                row
            })
            .collect();
        written.push(write_csv_artifact(out_dir, "noise_accuracy.csv", config, &header, &rows)?);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// opcount
// ---------------------------------------------------------------------------

/// Counters for one (ring geometry, operator) pair on one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpcountRow {
    pub operator: String,
    pub p: u32,
    pub r: u32,
    pub width: u32,
    pub height: u32,
    /// Neighborhoods actually labeled (interior size, or the selected count
    /// under a mask).
    pub neighborhoods: u64,
    pub selection: bool,
    /// Whether the selection mask fell back to all pixels (absent when
    /// selection is off).
    pub selection_fallback: Option<bool>,
    pub predicted: OpCounters,
    pub measured: OpCounters,
    /// `measured == predicted` — the instrumented loops hit the model.
    pub matches: bool,
    pub aux: AuxCounters,
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
struct OpcountArtifact<'a> {
    run_config: &'a RunConfig,
    notes: Vec<String>,
    rows: Vec<OpcountRow>,
}

fn synthetic_probe_image(size: u32, seed: u64) -> Result<RgbImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = size as usize * size as usize;
    let [r, g, b] = [0u8; 3].map(|_| {
        let data: Vec<u8> = (0..n).map(|_| rng.random()).collect();
        GrayPlane::new(size, size, data)
    });
    RgbImage::new([r?, g?, b?])
}

/// Count operations for every (ring, operator) pair of the schedule on an
/// image or a seeded synthetic probe; writes `opcount.json` (+ `.csv`).
pub fn cmd_opcount(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let RunConfig::Opcount { input, size, schedule, sps, lsv_mode, seed, format, out_dir } = config
    else {
        return Err(wrong_variant("opcount"));
    };
    let image = match (input, size) {
        (Some(path), None) => {
            check_input(path)?;
            load_image(path)?
        }
        (None, Some(0)) => return Err(Error::BadConfig("--size must be positive".into())),
        (None, Some(n)) => synthetic_probe_image(*n, *seed)?,
        _ => {
            return Err(Error::BadConfig(
                "pass exactly one of an input image or --size".into(),
            ))
        }
    };
    if schedule.is_empty() {
        return Err(Error::BadSchedule("schedule has no ring geometries".into()));
    }

    let mut rows = Vec::with_capacity(schedule.len() * 2);
    for params in schedule {
        let fallback = if *sps {
            Some(significance_mask(&mean_plane(&image), params, *lsv_mode)?.fallback)
        } else {
            None
        };
        for operator in [OperatorKind::PerPlaneLbp, OperatorKind::Hclbp] {
            let report = measure_ops(&image, operator, params, sps.then_some(*lsv_mode))?;
            rows.push(OpcountRow {
                operator: operator.name().to_string(),
                p: report.context.p,
                r: report.context.r,
                width: report.context.width,
                height: report.context.height,
                neighborhoods: report.context.neighborhoods,
                selection: report.context.selection,
                selection_fallback: fallback,
                predicted: report.predicted,
                measured: report.modeled,
                matches: report.modeled == report.predicted,
                aux: report.aux,
                note: (fallback == Some(true)).then(|| {
                    "no point beat the global significance value; the mask fell back to \
                     all pixels, so counts equal the unmasked run"
                        .to_string()
                }),
            });
        }
    }

    let artifact = OpcountArtifact {
        run_config: config,
        notes: vec![
            "modeled counters charge one comparison, one subtraction, and one addition per \
             (neighborhood, neighbor) pair, plus two multiplications per fused bit"
                .to_string(),
            "divisions are zero by construction: histogram normalization (P + 2 divisions \
             per block) is outside the neighborhood model and tallied under aux.histogram"
                .to_string(),
        ],
        rows,
    };
    let mut written = vec![write_json_artifact(out_dir, "opcount.json", &artifact)?];
    if *format == OutputFormat::Csv {
        let counters = |c: &OpCounters| {
            format!(
                "{},{},{},{},{}",
                c.comparisons, c.multiplications, c.divisions, c.additions, c.subtractions
            )
        };
        let rows: Vec<String> = artifact
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.operator,
                    r.p,
                    r.r,
                    r.width,
                    r.height,
                    r.neighborhoods,
                    r.selection,
                    counters(&r.predicted),
                    counters(&r.measured),
                    r.matches,
                    r.aux.interpolation.total(),
                    r.aux.fusion_extra.total(),
                    r.aux.labeling.total(),
                    r.aux.selection.total(),
                    r.aux.histogram.total(),
                    r.selection_fallback.map(|f| f.to_string()).unwrap_or_default(),
                )
            })
            .collect();
        written.push(write_csv_artifact(
            out_dir,
            "opcount.csv",
            config,
            "operator,p,r,width,height,neighborhoods,selection,\
             predicted_comparisons,predicted_multiplications,predicted_divisions,\
             predicted_additions,predicted_subtractions,\
             measured_comparisons,measured_multiplications,measured_divisions,\
             measured_additions,measured_subtractions,matches,\
             aux_interpolation,aux_fusion_extra,aux_labeling,aux_selection,aux_histogram,\
             selection_fallback",
            &rows,
        )?);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct SynthArtifact<'a> {
    run_config: &'a RunConfig,
    classes: Vec<String>,
    files: Vec<String>,
}

/// Generate the synthetic corpus at `dest` (one directory per class) and a
/// `manifest.json` listing every file, with the generating config embedded.
pub fn cmd_synth(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let RunConfig::Synth { dest, width, height, per_class, seed } = config else {
        return Err(wrong_variant("synth"));
    };
    let spec = SynthSpec { width: *width, height: *height, per_class: *per_class, seed: *seed };
    let paths = write_corpus(dest, &spec)?;
    let files = paths
        .iter()
        .map(|p| {
            p.strip_prefix(dest)
                .unwrap_or(p)
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/")
        })
        .collect();
    let artifact = SynthArtifact {
        run_config: config,
        classes: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        files,
    };
    Ok(vec![write_json_artifact(dest, "manifest.json", &artifact)?])
}
