//! Significant-point selection: compute the local/global significance
//! values on a textured image and see which pixels survive.
//!
//! Run with: `cargo run --example significant_points`

use hclbp::raster::{mean_plane, OperatorParams};
use hclbp::sps::{gsv, significance_mask, LsvMode};
use hclbp::synth::{generate_image, SynthSpec};

fn main() -> hclbp::Result<()> {
    let spec = SynthSpec { width: 96, height: 96, per_class: 1, seed: 3 };
    let params = OperatorParams::new(8, 1)?;

    for (class, name) in ["flat", "checker", "stripes", "waves"].iter().enumerate() {
        let image = generate_image(class, 0, &spec)?;
        // Selection runs on the mean of the three planes.
        let mean = mean_plane(&image);
        let global = gsv(&mean, &params, LsvMode::Absolute)?;
        let mask = significance_mask(&mean, &params, LsvMode::Absolute)?;
        let (w, h) = (mask.width(), mask.height());
        let fraction = mask.selected_count() as f64 / (w as usize * h as usize) as f64;
        println!(
            "{name:8}  gsv {global:8.4}  selected {:5} / {} interior points ({:.1}%){}",
            mask.selected_count(),
            w as usize * h as usize,
            100.0 * fraction,
            if mask.fallback { "  [fallback: nothing beat the global value]" } else { "" }
        );
    }

    // A constant image has no point above the global mean difference, so
    // selection falls back to keeping everything rather than nothing.
    let flat = hclbp::raster::GrayPlane::filled(32, 32, 100)?;
    let mask = significance_mask(&flat, &params, LsvMode::Absolute)?;
    println!(
        "\nconstant image: fallback = {}, selected = {} (all interior points)",
        mask.fallback,
        mask.selected_count()
    );
    Ok(())
}
