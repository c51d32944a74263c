//! Noise-robustness comparison: classification accuracy of the per-plane,
//! fused, and fused+selection descriptors as impulse noise grows.
//!
//! Run with: `cargo run --example noise_robustness` (takes ~a minute)

use hclbp::bench::{build_dataset_index, noise_benchmark, Metric};
use hclbp::cli::variant_config;
use hclbp::raster::OperatorParams;
use hclbp::sps::LsvMode;
use hclbp::synth::{write_corpus, SynthSpec};

fn main() -> hclbp::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let spec = SynthSpec { width: 96, height: 96, per_class: 12, seed: 42 };
    write_corpus(dir.path(), &spec)?;
    let index = build_dataset_index(dir.path(), None)?;

    let schedule = vec![OperatorParams::new(8, 1)?];
    let extractors: Vec<_> = ["per-plane", "full", "full+sps"]
        .iter()
        .map(|name| Ok((name.to_string(), variant_config(name, &schedule, LsvMode::Absolute)?)))
        .collect::<hclbp::Result<_>>()?;

    let ratios = [0.0, 0.1, 0.2, 0.3];
    let print_table = |title: &str, report: &hclbp::bench::NoiseBenchReport| {
        println!("{title}");
        println!("{:10} {}", "extractor", ratios.map(|r| format!("{:6.0}%", 100.0 * r)).join(" "));
        for (name, _) in &extractors {
            let row: Vec<String> = report
                .rows
                .iter()
                .filter(|r| &r.extractor == name)
                .map(|r| format!("{:6.1}", r.accuracy))
                .collect();
            println!("{name:10} {}", row.join(" "));
        }
        println!();
    };

    // Default protocol: every image is noisy, training folds included. The
    // corpus is easy enough that all descriptors weather this well.
    let matched = noise_benchmark(&index, &extractors, &ratios, 4, 1, Metric::L2, 42, true)?;
    print_table("train and test both noisy (accuracy %):", &matched);

    // Mismatched protocol: train on clean descriptors, classify noisy
    // queries. This is the harder setting, and where the fused operator's
    // tolerance of single-plane impulses separates it from per-plane LBP.
    let mismatched = noise_benchmark(&index, &extractors, &ratios, 4, 1, Metric::L2, 42, false)?;
    print_table("clean training, noisy queries (accuracy %):", &mismatched);
    Ok(())
}
