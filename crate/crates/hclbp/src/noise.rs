//! Salt-and-pepper noise injection and its channel-level statistics.
//!
//! Corruption is decided independently per (pixel, plane) cell. The
//! generator stream is fixed so artifacts are reproducible: pixels are
//! visited row-major, planes in R, G, B order within a pixel; each cell
//! takes one uniform draw to decide corruption and, only when corrupted,
//! one more to pick salt (255) or pepper (0) with equal probability.
//!
//! For color images this per-cell independence means a noisy pixel usually
//! has only one corrupted plane — the channel-effect statistics quantify
//! that, and they are what the fused operator's noise resistance leans on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RgbImage;

/// Impulse-noise parameters: per-cell corruption probability and the seed
/// that makes a run reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub ratio: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) || !ratio.is_finite() {
            return Err(Error::BadRatio(ratio));
        }
        Ok(Self { ratio, seed })
    }
}

/// Corrupt each (pixel, plane) cell independently with probability
/// `spec.ratio`, writing 255 or 0 with equal chance.
pub fn apply_impulse_noise(image: &RgbImage, spec: &NoiseSpec) -> Result<RgbImage> {
    NoiseSpec::new(spec.ratio, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = image.clone();
    let (w, h) = (image.width(), image.height());
    for y in 0..h {
        for x in 0..w {
            for plane in out.planes_mut() {
                if rng.random::<f64>() < spec.ratio {
                    let value = if rng.random::<f64>() < 0.5 { 255 } else { 0 };
                    plane.set(x, y, value);
                }
            }
        }
    }
    Ok(out)
}

/// How many of a noisy pixel's planes changed: tallies of pixels with
/// exactly 1, 2, or 3 differing planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChannelEffectStats {
    /// `counts[k - 1]` = pixels with exactly `k` differing planes.
    pub counts: [u64; 3],
    pub total_noisy: u64,
}

impl ChannelEffectStats {
    /// Fractions of noisy pixels by differing-plane count; `None` when no
    /// pixel differs.
    pub fn fractions(&self) -> Option<[f64; 3]> {
        if self.total_noisy == 0 {
            return None;
        }
        Some(self.counts.map(|c| c as f64 / self.total_noisy as f64))
    }
}

/// Compare a clean/noisy pair pixel by pixel. Only observable changes
/// count: an impulse that happens to rewrite a cell's original value is
/// invisible here.
pub fn channel_effect_stats(clean: &RgbImage, noisy: &RgbImage) -> Result<ChannelEffectStats> {
    if clean.width() != noisy.width() || clean.height() != noisy.height() {
        return Err(Error::PlaneMismatch);
    }
    let mut stats = ChannelEffectStats::default();
    let n = clean.width() as usize * clean.height() as usize;
    for i in 0..n {
        let mut k = 0;
        for pl in 0..3 {
            if clean.plane(pl).data()[i] != noisy.plane(pl).data()[i] {
                k += 1;
            }
        }
        if k > 0 {
            stats.counts[k - 1] += 1;
            stats.total_noisy += 1;
        }
    }
    Ok(stats)
}

/// Analytic distribution of differing-plane counts for a noisy pixel:
/// conditioned on at least one of the three cells being corrupted,
/// the chance that exactly `k` were. Requires `ratio` in (0, 1].
///
/// # Examples
///
/// ```
/// use hclbp::noise::expected_channel_effect;
///
/// let f = expected_channel_effect(0.4).unwrap();
/// assert!((f[0] - 0.5510204081632653).abs() < 1e-12);
/// ```
pub fn expected_channel_effect(ratio: f64) -> Result<[f64; 3]> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::BadRatio(ratio));
    }
    let p = ratio;
    let q = 1.0 - p;
    let denom = 1.0 - q * q * q;
    Ok([
        3.0 * p * q * q / denom,
        3.0 * p * p * q / denom,
        p * p * p / denom,
    ])
}
