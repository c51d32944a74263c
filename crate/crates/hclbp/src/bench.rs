//! Benchmark harness: dataset indexing, descriptor extraction with caching,
//! k-NN classification, stratified k-fold cross-validation, train-size
//! sweeps, leave-one-group-out splits, and the noise-robustness benchmark.
//!
//! Everything downstream of indexing is deterministic given a seed: folds
//! come from a seeded shuffle, k-NN ties break by documented rules rather
//! than input order, and parallel extraction merges results in index order,
//! so reports are byte-identical across runs and worker counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{extract, ExtractorConfig};
use crate::io::load_image;
use crate::noise::{apply_impulse_noise, channel_effect_stats, ChannelEffectStats, NoiseSpec};
use crate::raster::{window_grid, RgbImage};
use crate::synth::fnv1a;

/// Distance between descriptor vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Euclidean distance on the concatenated bins (default).
    #[default]
    L2,
    /// `sum (a-b)^2 / (a+b+eps)` — the usual histogram distance; the small
    /// epsilon keeps empty-bin pairs finite.
    ChiSquare,
}

pub const CHI_EPSILON: f64 = 1e-10;

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::L2 => "l2",
            Metric::ChiSquare => "chi-square",
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::ChiSquare => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y) / (x + y + CHI_EPSILON))
                .sum(),
        }
    }
}

/// One sample: an image, or one crop window of an image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub class: usize,
    pub path: PathBuf,
    /// Crop rectangle `[x, y, w, h]`, or the whole image when absent.
    pub window: Option<[u32; 4]>,
    /// First-level subdirectory under the class, when the dataset has one —
    /// the key for leave-one-group-out splits.
    pub group: Option<String>,
}

/// A scanned dataset: class names plus one entry per sample window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub classes: Vec<String>,
    pub entries: Vec<IndexEntry>,
    /// Window size the entries were produced with, if cropping was on.
    pub crop: Option<u32>,
}

impl DatasetIndex {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("index serializes");
        fs::write(path, json).map_err(|source| Error::Io { path: path.to_owned(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        let index: DatasetIndex = serde_json::from_slice(&bytes).map_err(|e| {
            Error::BadConfig(format!("cannot parse index {}: {e}", path.display()))
        })?;
        index.validate()?;
        Ok(index)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.entries {
            if entry.class >= self.classes.len() {
                return Err(Error::BadConfig(format!(
                    "entry {} references class {} but only {} classes exist",
                    entry.id,
                    entry.class,
                    self.classes.len()
                )));
            }
            if !seen.insert(&entry.id) {
                return Err(Error::BadConfig(format!("duplicate sample id {}", entry.id)));
            }
        }
        Ok(())
    }
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png") | Some("ppm")
    )
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let iter = fs::read_dir(dir).map_err(|source| Error::Io { path: dir.to_owned(), source })?;
    let mut paths = Vec::new();
    for item in iter {
        let item = item.map_err(|source| Error::Io { path: dir.to_owned(), source })?;
        paths.push(item.path());
    }
    paths.sort();
    Ok(paths)
}

/// Scan a class-per-directory dataset root. Images may sit directly in the
/// class directory or one level deeper (the subdirectory becomes the
/// entry's group). With `crop` set, every image is tiled into non-overlapping
/// `crop x crop` windows and each window becomes one sample.
pub fn build_dataset_index(root: &Path, crop: Option<u32>) -> Result<DatasetIndex> {
    let mut classes = Vec::new();
    let mut class_dirs = Vec::new();
    for path in read_dir_sorted(root)? {
        if path.is_dir() {
            classes.push(
                path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            );
            class_dirs.push(path);
        }
    }
    if classes.is_empty() {
        return Err(Error::NoClassDirs(root.to_owned()));
    }

    let mut entries = Vec::new();
    for (class, dir) in class_dirs.iter().enumerate() {
        let mut files: Vec<(Option<String>, PathBuf)> = Vec::new();
        for path in read_dir_sorted(dir)? {
            if path.is_dir() {
                let group = path.file_name().map(|n| n.to_string_lossy().into_owned());
                for nested in read_dir_sorted(&path)? {
                    if is_image_file(&nested) {
                        files.push((group.clone(), nested));
                    }
                }
            } else if is_image_file(&path) {
                files.push((None, path));
            }
        }
        if files.is_empty() {
            return Err(Error::EmptyClassDir(dir.clone()));
        }
        for (group, path) in files {
            let rel = path.strip_prefix(root).unwrap_or(&path).with_extension("");
            let stem = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            match crop {
                None => entries.push(IndexEntry { id: stem, class, path, window: None, group }),
                Some(size) => {
                    let image = load_image(&path)?;
                    let (cols, rows) = window_grid(image.width(), image.height(), size, size)?;
                    for i in 0..cols * rows {
                        let x = (i % cols) * size;
                        let y = (i / cols) * size;
                        entries.push(IndexEntry {
                            id: format!("{stem}#{i:02}"),
                            class,
                            path: path.clone(),
                            window: Some([x, y, size, size]),
                            group: group.clone(),
                        });
                    }
                }
            }
        }
    }
    let index = DatasetIndex { classes, entries, crop };
    index.validate()?;
    Ok(index)
}

/// A descriptor row ready for classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub class: usize,
    pub bins: Vec<f64>,
}

/// Cut one entry's pixels out of its source image.
fn entry_image(source: &RgbImage, entry: &IndexEntry) -> Result<RgbImage> {
    match entry.window {
        None => Ok(source.clone()),
        Some([x, y, w, h]) => source.crop(x, y, w, h),
    }
}

fn group_by_path(index: &DatasetIndex) -> BTreeMap<&Path, Vec<usize>> {
    let mut groups: BTreeMap<&Path, Vec<usize>> = BTreeMap::new();
    for (i, entry) in index.entries.iter().enumerate() {
        groups.entry(&entry.path).or_default().push(i);
    }
    groups
}

/// Extract descriptors for every entry, in entry order. Each source file is
/// loaded once; files are processed in parallel and results merged by entry
/// position, so the output is independent of worker count.
///
/// With `cache` set, rows are read from that CSV file when its sample ids
/// and extractor fingerprint match the request exactly (anything else
/// triggers a clean recompute), and written back after extraction. Floats
/// round-trip the cache losslessly.
pub fn extract_samples(
    index: &DatasetIndex,
    config: &ExtractorConfig,
    cache: Option<&Path>,
) -> Result<Vec<Sample>> {
    config.validate()?;
    if let Some(path) = cache {
        if let Some(samples) = try_read_cache(path, index, config) {
            return Ok(samples);
        }
    }
    let groups: Vec<(&Path, Vec<usize>)> = group_by_path(index).into_iter().collect();
    let per_path: Vec<Vec<(usize, Sample)>> = groups
        .into_par_iter()
        .map(|(path, idxs)| -> Result<Vec<(usize, Sample)>> {
            let source = load_image(path)?;
            idxs.into_iter()
                .map(|i| {
                    let entry = &index.entries[i];
                    let image = entry_image(&source, entry)?;
                    let d = extract(&image, config)?;
                    Ok((i, Sample { id: entry.id.clone(), class: entry.class, bins: d.bins }))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut tagged: Vec<(usize, Sample)> = per_path.into_iter().flatten().collect();
    tagged.sort_by_key(|(i, _)| *i);
    let samples: Vec<Sample> = tagged.into_iter().map(|(_, s)| s).collect();
    if let Some(path) = cache {
        write_cache(path, config, &samples)?;
    }
    Ok(samples)
}

fn try_read_cache(path: &Path, index: &DatasetIndex, config: &ExtractorConfig) -> Option<Vec<Sample>> {
    let mut reader = csv::Reader::from_path(path).ok()?;
    let hash = config.config_hash();
    let want_bins = config.descriptor_len();
    let mut samples = Vec::with_capacity(index.entries.len());
    for record in reader.records() {
        let record = record.ok()?;
        if record.len() != 3 + want_bins {
            return None;
        }
        let entry = index.entries.get(samples.len())?;
        if &record[0] != entry.id || record[2] != hash {
            return None;
        }
        let class: usize = record[1].parse().ok()?;
        if class != entry.class {
            return None;
        }
        let bins: Vec<f64> =
            record.iter().skip(3).map(str::parse).collect::<std::result::Result<_, _>>().ok()?;
        samples.push(Sample { id: entry.id.clone(), class, bins });
    }
    (samples.len() == index.entries.len()).then_some(samples)
}

fn write_cache(path: &Path, config: &ExtractorConfig, samples: &[Sample]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|source| Error::Io { path: parent.to_owned(), source })?;
        }
    }
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::BadConfig(format!("cannot open cache {}: {e}", path.display())))?;
    let hash = config.config_hash();
    let mut header = vec!["id".to_string(), "class".to_string(), "config".to_string()];
    header.extend((0..config.descriptor_len()).map(|i| format!("b{i}")));
    let io_err = |e: csv::Error| Error::BadConfig(format!("cache write failed: {e}"));
    writer.write_record(&header).map_err(io_err)?;
    for s in samples {
        let mut record = vec![s.id.clone(), s.class.to_string(), hash.clone()];
        record.extend(s.bins.iter().map(|b| format!("{b}")));
        writer.write_record(&record).map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io { path: path.to_owned(), source })
}

/// Predict a query's class from its k nearest training samples: majority
/// vote, ties broken by the lower summed distance, then by the smaller
/// class id. The ranking sorts on (distance, class, id), so the outcome is
/// invariant under any permutation of the training set.
pub fn knn_classify(train: &[Sample], query: &[f64], k: usize, metric: Metric) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::BadConfig("training set is empty".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::BadConfig(format!(
            "k = {k} must be between 1 and the training size {}",
            train.len()
        )));
    }
    if train.iter().any(|s| s.bins.len() != query.len()) {
        return Err(Error::DescriptorMismatch);
    }
    let mut ranked: Vec<(f64, usize, &str)> =
        train.iter().map(|s| (metric.distance(&s.bins, query), s.class, s.id.as_str())).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
    ranked.truncate(k);

    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &(d, class, _) in &ranked {
        let t = tally.entry(class).or_insert((0, 0.0));
        t.0 += 1;
        t.1 += d;
    }
    let (&class, _) = tally
        .iter()
        .max_by(|(ca, (va, da)), (cb, (vb, db))| {
            va.cmp(vb).then(db.total_cmp(da)).then(cb.cmp(ca))
        })
        .expect("k >= 1 guarantees at least one vote");
    Ok(class)
}

/// Everything that determined a report's numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub folds: usize,
    pub k: usize,
    pub metric: Metric,
    pub seed: u64,
    pub extractor: ExtractorConfig,
}

/// Cross-validation outcome. Accuracies are percentages; `confusion[t][p]`
/// counts true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub per_class: Vec<f64>,
    pub fold_accuracies: Vec<f64>,
    pub confusion: Vec<Vec<u64>>,
    pub classes: Vec<String>,
    pub protocol: Protocol,
}

/// Seeded stratified fold assignment: within each class (taken in class
/// order), sample positions are shuffled and dealt round-robin, so fold
/// sizes per class differ by at most one.
fn fold_assignments(
    samples: &[Sample],
    classes: &[String],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::BadConfig(format!("folds = {folds}, need at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; samples.len()];
    for class in 0..classes.len() {
        let mut members: Vec<usize> =
            (0..samples.len()).filter(|&i| samples[i].class == class).collect();
        if members.len() < folds {
            return Err(Error::ClassSmallerThanFolds {
                class: classes[class].clone(),
                size: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (i, &sample) in members.iter().enumerate() {
            assignment[sample] = i % folds;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold cross-validation over one sample set.
pub fn kfold_cv_samples(
    samples: &[Sample],
    classes: &[String],
    folds: usize,
    k: usize,
    metric: Metric,
    seed: u64,
    extractor: &ExtractorConfig,
) -> Result<ClassificationReport> {
    kfold_paired(samples, samples, classes, folds, k, metric, seed, extractor)
}

/// The k-fold engine over two aligned sample pools: fold membership is
/// computed once, training descriptors come from `train_pool` and query
/// descriptors from `test_pool`. With both pools equal this is ordinary
/// cross-validation; the noise benchmark passes clean/noisy pools to model
/// training on clean data.
#[allow(clippy::too_many_arguments)]
fn kfold_paired(
    train_pool: &[Sample],
    test_pool: &[Sample],
    classes: &[String],
    folds: usize,
    k: usize,
    metric: Metric,
    seed: u64,
    extractor: &ExtractorConfig,
) -> Result<ClassificationReport> {
    if train_pool.len() != test_pool.len()
        || train_pool.iter().zip(test_pool).any(|(a, b)| a.id != b.id || a.class != b.class)
    {
        return Err(Error::BadConfig("train and test pools are not aligned".into()));
    }
    let assignment = fold_assignments(test_pool, classes, folds, seed)?;

    let per_fold: Vec<(Vec<Vec<u64>>, u64, u64)> = (0..folds)
        .into_par_iter()
        .map(|fold| -> Result<(Vec<Vec<u64>>, u64, u64)> {
            let train: Vec<Sample> = train_pool
                .iter()
                .enumerate()
                .filter(|(i, _)| assignment[*i] != fold)
                .map(|(_, s)| s.clone())
                .collect();
            let mut confusion = vec![vec![0u64; classes.len()]; classes.len()];
            let mut correct = 0u64;
            let mut total = 0u64;
            for (i, sample) in test_pool.iter().enumerate() {
                if assignment[i] != fold {
                    continue;
                }
                let predicted = knn_classify(&train, &sample.bins, k, metric)?;
                confusion[sample.class][predicted] += 1;
                total += 1;
                if predicted == sample.class {
                    correct += 1;
                }
            }
            Ok((confusion, correct, total))
        })
        .collect::<Result<_>>()?;

    let mut confusion = vec![vec![0u64; classes.len()]; classes.len()];
    let mut fold_accuracies = Vec::with_capacity(folds);
    for (fold_confusion, correct, total) in per_fold {
        for (acc, row) in confusion.iter_mut().zip(&fold_confusion) {
            for (a, b) in acc.iter_mut().zip(row) {
                *a += b;
            }
        }
        fold_accuracies.push(100.0 * correct as f64 / total as f64);
    }
    let trace: u64 = (0..classes.len()).map(|c| confusion[c][c]).sum();
    let total: u64 = confusion.iter().flatten().sum();
    let per_class = (0..classes.len())
        .map(|c| {
            let row: u64 = confusion[c].iter().sum();
            100.0 * confusion[c][c] as f64 / row as f64
        })
        .collect();
    Ok(ClassificationReport {
        accuracy: 100.0 * trace as f64 / total as f64,
        per_class,
        fold_accuracies,
        confusion,
        classes: classes.to_vec(),
        protocol: Protocol { folds, k, metric, seed, extractor: extractor.clone() },
    })
}

/// Index-level convenience: extract, then cross-validate.
#[allow(clippy::too_many_arguments)]
pub fn kfold_cv(
    index: &DatasetIndex,
    config: &ExtractorConfig,
    folds: usize,
    k: usize,
    metric: Metric,
    seed: u64,
    cache: Option<&Path>,
) -> Result<ClassificationReport> {
    let samples = extract_samples(index, config, cache)?;
    kfold_cv_samples(&samples, &index.classes, folds, k, metric, seed, config)
}

/// One train-size sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub k: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub classes: Vec<String>,
    pub metric: Metric,
    pub seed: u64,
    pub extractor: ExtractorConfig,
}

/// Accuracy as a function of training-set size: for each fraction, a seeded
/// stratified split reserves `round(fraction * class size)` samples per
/// class for training — floored to 1 and capped at size-1, so neither side
/// of the split is ever empty — and each k is evaluated on the rest.
pub fn train_size_sweep(
    samples: &[Sample],
    classes: &[String],
    fractions: &[f64],
    ks: &[usize],
    metric: Metric,
    seed: u64,
    extractor: &ExtractorConfig,
) -> Result<SweepReport> {
    if fractions.is_empty() || ks.is_empty() {
        return Err(Error::BadConfig("sweep needs at least one fraction and one k".into()));
    }
    for &f in fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::BadConfig(format!("train fraction {f} must be inside (0, 1)")));
        }
    }
    let mut rows = Vec::with_capacity(fractions.len() * ks.len());
    for &fraction in fractions {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&fraction.to_le_bytes()));
        let mut train = Vec::new();
        let mut test = Vec::new();
        for class in 0..classes.len() {
            let mut members: Vec<usize> =
                (0..samples.len()).filter(|&i| samples[i].class == class).collect();
            if members.len() < 2 {
                return Err(Error::BadConfig(format!(
                    "class {} has {} samples; splitting needs at least 2",
                    classes[class],
                    members.len()
                )));
            }
            members.shuffle(&mut rng);
            let n_train =
                ((fraction * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
            for (i, &m) in members.iter().enumerate() {
                if i < n_train {
                    train.push(samples[m].clone());
                } else {
                    test.push(samples[m].clone());
                }
            }
        }
        for &k in ks {
            let mut correct = 0u64;
            for sample in &test {
                if knn_classify(&train, &sample.bins, k, metric)? == sample.class {
                    correct += 1;
                }
            }
            rows.push(SweepRow {
                fraction,
                k,
                train_size: train.len(),
                test_size: test.len(),
                accuracy: 100.0 * correct as f64 / test.len() as f64,
            });
        }
    }
    Ok(SweepReport {
        rows,
        classes: classes.to_vec(),
        metric,
        seed,
        extractor: extractor.clone(),
    })
}

/// One noise-benchmark cell: an extractor evaluated at a noise ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBenchRow {
    pub extractor: String,
    pub ratio: f64,
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBenchReport {
    pub rows: Vec<NoiseBenchRow>,
    pub classes: Vec<String>,
    pub folds: usize,
    pub k: usize,
    pub metric: Metric,
    pub seed: u64,
    /// True: training folds see the same noisy images as test folds
    /// (single-corpus framing, the default). False: training descriptors
    /// come from clean images, only queries are noisy.
    pub noise_train: bool,
}

/// Noise stream seed for one source file: keyed on the run seed, the file's
/// root-relative id stem, and the ratio, so equal configs reproduce the
/// same corruption wherever the dataset root happens to live.
fn noise_stream_seed(stem: &str, seed: u64, ratio: f64) -> u64 {
    seed ^ fnv1a(stem.as_bytes()) ^ ratio.to_bits()
}

fn entry_stem(index: &DatasetIndex, entry_idx: usize) -> &str {
    index.entries[entry_idx].id.split('#').next().unwrap_or_default()
}

/// Load every entry's pixels, optionally impulse-noised. Noise is applied
/// to the source image before windowing (windows of one image share its
/// noise), seeded per source file and ratio, independent of absolute paths.
fn load_entry_images(index: &DatasetIndex, noise: Option<(f64, u64)>) -> Result<Vec<RgbImage>> {
    let groups: Vec<(&Path, Vec<usize>)> = group_by_path(index).into_iter().collect();
    let per_path: Vec<Vec<(usize, RgbImage)>> = groups
        .into_par_iter()
        .map(|(path, idxs)| -> Result<Vec<(usize, RgbImage)>> {
            let mut source = load_image(path)?;
            if let Some((ratio, seed)) = noise {
                let stem = entry_stem(index, idxs[0]);
                let spec = NoiseSpec::new(ratio, noise_stream_seed(stem, seed, ratio))?;
                source = apply_impulse_noise(&source, &spec)?;
            }
            idxs.into_iter()
                .map(|i| Ok((i, entry_image(&source, &index.entries[i])?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut tagged: Vec<(usize, RgbImage)> = per_path.into_iter().flatten().collect();
    tagged.sort_by_key(|(i, _)| *i);
    Ok(tagged.into_iter().map(|(_, img)| img).collect())
}

/// Channel-corruption tallies aggregated over the corpus at one ratio,
/// using the same per-file noise streams as [`noise_benchmark`]. Stats are
/// gathered on whole source images (before any windowing) — that is what
/// the corruption hits. Ratio 0 yields `total_noisy == 0`.
pub fn corpus_noise_stats(index: &DatasetIndex, ratio: f64, seed: u64) -> Result<ChannelEffectStats> {
    let groups: Vec<(&Path, Vec<usize>)> = group_by_path(index).into_iter().collect();
    let per_path: Vec<ChannelEffectStats> = groups
        .into_par_iter()
        .map(|(path, idxs)| -> Result<ChannelEffectStats> {
            let clean = load_image(path)?;
            let stem = entry_stem(index, idxs[0]);
            let spec = NoiseSpec::new(ratio, noise_stream_seed(stem, seed, ratio))?;
            let noisy = apply_impulse_noise(&clean, &spec)?;
            channel_effect_stats(&clean, &noisy)
        })
        .collect::<Result<_>>()?;
    let mut total = ChannelEffectStats::default();
    for stats in per_path {
        for (acc, c) in total.counts.iter_mut().zip(stats.counts) {
            *acc += c;
        }
        total.total_noisy += stats.total_noisy;
    }
    Ok(total)
}

fn samples_from_images(
    images: &[RgbImage],
    index: &DatasetIndex,
    config: &ExtractorConfig,
) -> Result<Vec<Sample>> {
    config.validate()?;
    images
        .par_iter()
        .zip(&index.entries)
        .map(|(image, entry)| {
            let d = extract(image, config)?;
            Ok(Sample { id: entry.id.clone(), class: entry.class, bins: d.bins })
        })
        .collect()
}

/// Accuracy per (extractor, ratio) under impulse noise. Ratio 0 evaluates
/// the clean corpus, so its rows reproduce plain cross-validation exactly.
#[allow(clippy::too_many_arguments)]
pub fn noise_benchmark(
    index: &DatasetIndex,
    extractors: &[(String, ExtractorConfig)],
    ratios: &[f64],
    folds: usize,
    k: usize,
    metric: Metric,
    seed: u64,
    noise_train: bool,
) -> Result<NoiseBenchReport> {
    if extractors.is_empty() || ratios.is_empty() {
        return Err(Error::BadConfig("noise benchmark needs extractors and ratios".into()));
    }
    for &ratio in ratios {
        NoiseSpec::new(ratio, 0)?;
    }
    let clean_images = load_entry_images(index, None)?;
    // Clean descriptors per extractor, computed at most once.
    let mut clean_samples: Vec<Option<Vec<Sample>>> = vec![None; extractors.len()];
    let mut rows = Vec::with_capacity(extractors.len() * ratios.len());
    for &ratio in ratios {
        // Noisy pixels depend only on the ratio, so every extractor shares
        // one noised copy of the corpus.
        let noisy_images = if ratio == 0.0 {
            None
        } else {
            Some(load_entry_images(index, Some((ratio, seed)))?)
        };
        for (e, (name, config)) in extractors.iter().enumerate() {
            if clean_samples[e].is_none() && (noisy_images.is_none() || !noise_train) {
                clean_samples[e] = Some(samples_from_images(&clean_images, index, config)?);
            }
            let noisy_samples = match &noisy_images {
                None => clean_samples[e].clone().expect("clean pool just built"),
                Some(images) => samples_from_images(images, index, config)?,
            };
            let report = if noise_train || noisy_images.is_none() {
                kfold_paired(
                    &noisy_samples,
                    &noisy_samples,
                    &index.classes,
                    folds,
                    k,
                    metric,
                    seed,
                    config,
                )?
            } else {
                let clean = clean_samples[e].as_ref().expect("clean pool just built");
                kfold_paired(clean, &noisy_samples, &index.classes, folds, k, metric, seed, config)?
            };
            rows.push(NoiseBenchRow {
                extractor: name.clone(),
                ratio,
                accuracy: report.accuracy,
                fold_accuracies: report.fold_accuracies,
            });
        }
    }
    Ok(NoiseBenchReport {
        rows,
        classes: index.classes.clone(),
        folds,
        k,
        metric,
        seed,
        noise_train,
    })
}

/// Leave-one-group-out: each distinct group (in name order) serves once as
/// the test set. Requires group metadata on every entry and at least two
/// groups. `fold_accuracies` follows group name order.
pub fn grouped_cv(
    samples: &[Sample],
    index: &DatasetIndex,
    k: usize,
    metric: Metric,
    extractor: &ExtractorConfig,
) -> Result<ClassificationReport> {
    if samples.len() != index.entries.len()
        || samples.iter().zip(&index.entries).any(|(s, e)| s.id != e.id)
    {
        return Err(Error::BadConfig("samples are not aligned with the index".into()));
    }
    let mut groups = std::collections::BTreeSet::new();
    for entry in &index.entries {
        match &entry.group {
            Some(g) => {
                groups.insert(g.clone());
            }
            None => {
                return Err(Error::BadConfig(format!(
                    "entry {} has no group; grouped splits need nested class directories",
                    entry.id
                )))
            }
        }
    }
    if groups.len() < 2 {
        return Err(Error::BadConfig("grouped split needs at least two groups".into()));
    }
    let groups: Vec<String> = groups.into_iter().collect();
    let classes = &index.classes;
    let mut confusion = vec![vec![0u64; classes.len()]; classes.len()];
    let mut fold_accuracies = Vec::with_capacity(groups.len());
    for group in &groups {
        let train: Vec<Sample> = samples
            .iter()
            .zip(&index.entries)
            .filter(|(_, e)| e.group.as_deref() != Some(group))
            .map(|(s, _)| s.clone())
            .collect();
        let mut correct = 0u64;
        let mut total = 0u64;
        for (sample, _) in
            samples.iter().zip(&index.entries).filter(|(_, e)| e.group.as_deref() == Some(group))
        {
            let predicted = knn_classify(&train, &sample.bins, k, metric)?;
            confusion[sample.class][predicted] += 1;
            total += 1;
            if predicted == sample.class {
                correct += 1;
            }
        }
        fold_accuracies.push(100.0 * correct as f64 / total as f64);
    }
    let trace: u64 = (0..classes.len()).map(|c| confusion[c][c]).sum();
    let total: u64 = confusion.iter().flatten().sum();
    let per_class = (0..classes.len())
        .map(|c| {
            let row: u64 = confusion[c].iter().sum();
            100.0 * confusion[c][c] as f64 / row as f64
        })
        .collect();
    Ok(ClassificationReport {
        accuracy: 100.0 * trace as f64 / total as f64,
        per_class,
        fold_accuracies,
        confusion,
        classes: classes.clone(),
        protocol: Protocol {
            folds: groups.len(),
            k,
            metric,
            seed: 0,
            extractor: extractor.clone(),
        },
    })
}
