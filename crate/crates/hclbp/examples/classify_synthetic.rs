//! End-to-end classification: generate the synthetic corpus, index it,
//! extract descriptors, and cross-validate a 1-NN classifier.
//!
//! Run with: `cargo run --example classify_synthetic`

use hclbp::bench::{build_dataset_index, extract_samples, kfold_cv_samples, Metric};
use hclbp::fusion::ExtractorConfig;
use hclbp::raster::OperatorParams;
use hclbp::synth::{write_corpus, SynthSpec};

fn main() -> hclbp::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let spec = SynthSpec { width: 64, height: 64, per_class: 10, seed: 42 };
    write_corpus(dir.path(), &spec)?;

    let index = build_dataset_index(dir.path(), None)?;
    println!("indexed {} samples in {} classes", index.entries.len(), index.classes.len());

    let config = ExtractorConfig {
        schedule: vec![OperatorParams::new(8, 1)?],
        ..ExtractorConfig::default()
    };
    let samples = extract_samples(&index, &config, None)?;

    let report = kfold_cv_samples(&samples, &index.classes, 5, 1, Metric::L2, 7, &config)?;
    println!("5-fold 1-NN accuracy: {:.1}%", report.accuracy);
    for (class, accuracy) in report.classes.iter().zip(&report.per_class) {
        println!("  {class:8} {accuracy:6.1}%");
    }
    println!("confusion (rows = true class, columns = predicted):");
    for (class, row) in report.classes.iter().zip(&report.confusion) {
        println!("  {class:8} {row:?}");
    }
    Ok(())
}
