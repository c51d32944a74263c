//! Synthetic texture corpus: four visually distinct color-texture classes
//! generated from a seed, so the whole benchmark harness runs without any
//! external dataset.
//!
//! Classes are flat fields, checkerboards, vertical stripes, and
//! random-phase sinusoids, each in its own color palette. Within a class,
//! every sample gets seeded jitter — palette shifts, pattern phase, wave
//! phase — so descriptors vary without losing separability. Patterns are
//! identical across the three planes (only the palette differs per plane),
//! which gives the channel-fused operator coherent cross-plane structure to
//! work with.
//!
//! All values are clamped to 1..=254: no synthetic pixel sits at an impulse
//! extreme, so every injected impulse is observable in a clean/noisy diff.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_png;
use crate::raster::{GrayPlane, RgbImage};

/// Class names double as corpus directory names, in label order.
pub const CLASS_NAMES: [&str; 4] = ["flat", "checker", "stripes", "waves"];

/// Corpus shape and the seed everything derives from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: u32,
    pub height: u32,
    pub per_class: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    /// The bundled acceptance corpus: 128x128 images, 25 per class, seed 42.
    fn default() -> Self {
        Self { width: 128, height: 128, per_class: 25, seed: 42 }
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn clamp_channel(v: f64) -> u8 {
    v.round().clamp(1.0, 254.0) as u8
}

/// Deterministically generate one corpus image. The generator stream is
/// keyed on (seed, class name, index), so any image can be regenerated in
/// isolation.
pub fn generate_image(class: usize, index: usize, spec: &SynthSpec) -> Result<RgbImage> {
    if class >= CLASS_NAMES.len() {
        return Err(Error::BadParams(format!(
            "class index {class} out of range (have {})",
            CLASS_NAMES.len()
        )));
    }
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::ZeroDimension);
    }
    let tag = format!("{}/{}", CLASS_NAMES[class], index);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a(tag.as_bytes()));
    let (w, h) = (spec.width, spec.height);
    let n = w as usize * h as usize;
    let mut planes = [vec![0u8; n], vec![0u8; n], vec![0u8; n]];

    match class {
        // Flat field: one jittered base color plus faint correlated grain.
        0 => {
            let base = [150.0, 120.0, 100.0].map(|b| b + rng.random_range(-25.0..=25.0));
            for i in 0..n {
                let grain = rng.random_range(-2.0..=2.0);
                for pl in 0..3 {
                    planes[pl][i] = clamp_channel(base[pl] + grain);
                }
            }
        }
        // Checkerboard: 8-pixel cells, two jittered palette colors, random
        // phase.
        1 => {
            let cell = 8;
            let a = [190.0, 60.0, 50.0].map(|b| b + rng.random_range(-15.0..=15.0));
            let b = [40.0, 150.0, 70.0].map(|v| v + rng.random_range(-15.0..=15.0));
            let (ox, oy) = (rng.random_range(0..cell), rng.random_range(0..cell));
            for y in 0..h {
                for x in 0..w {
                    let on = (((x + ox) / cell) + ((y + oy) / cell)) % 2 == 0;
                    let color = if on { a } else { b };
                    let i = (y * w + x) as usize;
                    for pl in 0..3 {
                        planes[pl][i] = clamp_channel(color[pl]);
                    }
                }
            }
        }
        // Vertical stripes: 4-pixel bands, random phase.
        2 => {
            let band = 4;
            let a = [40.0, 70.0, 180.0].map(|b| b + rng.random_range(-15.0..=15.0));
            let b = [210.0, 190.0, 60.0].map(|v| v + rng.random_range(-15.0..=15.0));
            let ox = rng.random_range(0..2 * band);
            for y in 0..h {
                for x in 0..w {
                    let on = ((x + ox) / band) % 2 == 0;
                    let color = if on { a } else { b };
                    let i = (y * w + x) as usize;
                    for pl in 0..3 {
                        planes[pl][i] = clamp_channel(color[pl]);
                    }
                }
            }
        }
        // Diagonal sinusoid: smooth waves, random phase, shared across
        // planes.
        _ => {
            let mid = [120.0, 90.0, 160.0];
            let amp = [50.0, 60.0, 40.0];
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            for y in 0..h {
                for x in 0..w {
                    let t = std::f64::consts::TAU * (x as f64 / 12.0 + y as f64 / 24.0) + phase;
                    let s = t.sin();
                    let i = (y * w + x) as usize;
                    for pl in 0..3 {
                        planes[pl][i] = clamp_channel(mid[pl] + amp[pl] * s);
                    }
                }
            }
        }
    }

    let [r, g, b] = planes;
    RgbImage::new([
        GrayPlane::new(w, h, r)?,
        GrayPlane::new(w, h, g)?,
        GrayPlane::new(w, h, b)?,
    ])
}

/// Write the corpus as one directory per class filled with PNGs; returns
/// the written paths in deterministic order.
pub fn write_corpus(dir: &Path, spec: &SynthSpec) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(CLASS_NAMES.len() * spec.per_class);
    for (class, name) in CLASS_NAMES.iter().enumerate() {
        let class_dir = dir.join(name);
        fs::create_dir_all(&class_dir)
            .map_err(|source| Error::Io { path: class_dir.clone(), source })?;
        for index in 0..spec.per_class {
            let image = generate_image(class, index, spec)?;
            let path = class_dir.join(format!("{name}_{index:03}.png"));
            write_png(&path, &image)?;
            paths.push(path);
        }
    }
    Ok(paths)
}
