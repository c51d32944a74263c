//! Extract a color-texture descriptor from a synthetic image and walk
//! through its block layout.
//!
//! Run with: `cargo run --example extract_descriptor`

use hclbp::fusion::ExtractorConfig;
use hclbp::synth::{generate_image, SynthSpec};

fn main() -> hclbp::Result<()> {
    let spec = SynthSpec { width: 96, height: 96, per_class: 1, seed: 11 };
    let image = generate_image(3, 0, &spec)?; // a "waves" texture

    // Default config: rings (8,1) and (16,2), per-plane + fused blocks.
    let config = ExtractorConfig::default();
    let descriptor = hclbp::fusion::extract(&image, &config)?;

    println!("descriptor length: {} bins", descriptor.len());
    for (i, block) in descriptor.blocks.iter().enumerate() {
        let bins = descriptor.block_bins(i);
        let sum: f64 = bins.iter().sum();
        println!(
            "block {i}: {:>5} ring ({:2},{}) {} bins, sum {:.6}",
            block.name, block.p, block.r, block.len, sum
        );
    }

    // The fused block of the first ring, bin by bin: label 0..=P-1 are the
    // uniform patterns by popcount, P is all-zero-transitions, P+1 collects
    // every non-uniform code.
    let fused = descriptor
        .blocks
        .iter()
        .position(|b| b.name == "fused")
        .expect("default config includes the fused block");
    println!("\nfused (8,1) histogram:");
    for (label, value) in descriptor.block_bins(fused).iter().enumerate() {
        println!("  label {label:2}: {value:.5}");
    }
    Ok(())
}
