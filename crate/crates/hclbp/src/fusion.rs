//! Channel-fused binary patterns and whole-descriptor assembly.
//!
//! The fused operator sets a neighbor's bit only when that neighbor is
//! strictly brighter than the center in *all three* color planes at once.
//! A single impulse-corrupted plane can therefore veto a spurious bit that
//! plane-by-plane comparison would have kept, which is what gives the fused
//! histogram its noise resistance. Note the asymmetry with the single-plane
//! operator: fusion compares strictly, so a perfectly flat image fuses to
//! the all-zeros code (label 0), not the all-ones code.
//!
//! A full descriptor concatenates, per ring geometry, the three per-plane
//! riu histograms and the fused histogram — `4 * (P + 2)` bins per scale —
//! optionally gated by a significant-points mask computed on the mean plane
//! of the same image at the same geometry.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lbp::{self, Descriptor, LabelMap, LbpCode};
use crate::opcount::Meter;
use crate::raster::{mean_plane, OperatorParams, RgbImage, Sampler};
use crate::sps::{significance_mask, LsvMode, SignificanceMask};

/// Fused bit: 1 only when the neighbor strictly exceeds the center in every
/// plane. Ties in any plane veto the bit.
///
/// # Examples
///
/// ```
/// use hclbp::fusion::hclbp_bit;
///
/// assert_eq!(hclbp_bit([5.0, 5.0, 5.0], [4.0, 4.0, 4.0]), 1);
/// assert_eq!(hclbp_bit([5.0, 4.0, 5.0], [4.0, 4.0, 4.0]), 0); // tie in one plane
/// assert_eq!(hclbp_bit([5.0, 3.0, 5.0], [4.0, 4.0, 4.0]), 0);
/// ```
pub fn hclbp_bit(neighbor: [f64; 3], center: [f64; 3]) -> u64 {
    (neighbor[0] > center[0] && neighbor[1] > center[1] && neighbor[2] > center[2]) as u64
}

/// Fused riu label map over the interior of a color image.
pub fn hclbp_label_map(
    image: &RgbImage,
    params: &OperatorParams,
    mask: Option<&SignificanceMask>,
) -> Result<LabelMap> {
    hclbp_label_map_metered(image, params, mask, &mut Meter::new())
}

pub(crate) fn hclbp_label_map_metered(
    image: &RgbImage,
    params: &OperatorParams,
    mask: Option<&SignificanceMask>,
    meter: &mut Meter,
) -> Result<LabelMap> {
    let (iw, ih) = params.interior(image.width(), image.height())?;
    lbp::check_mask(mask, iw, ih)?;
    let r = params.r;
    let sampler = Sampler::new(params);
    let p = params.p as usize;
    let mut rings = [Vec::with_capacity(p), Vec::with_capacity(p), Vec::with_capacity(p)];
    let mut labels = Vec::with_capacity(iw as usize * ih as usize);
    for iy in 0..ih {
        for ix in 0..iw {
            if let Some(m) = mask {
                if !m.selected(ix, iy) {
                    labels.push(None);
                    continue;
                }
            }
            let (x, y) = (ix + r, iy + r);
            let mut centers = [0.0f64; 3];
            for pl in 0..3 {
                let plane = image.plane(pl);
                sampler.sample_into(plane, x, y, &mut rings[pl], &mut meter.aux.interpolation);
                centers[pl] = plane.get(x, y) as f64;
            }
            labels.push(Some(fused_label(&centers, &rings, params, meter) as u16));
        }
    }
    LabelMap::from_labels(iw, ih, labels)
}

/// One fused neighborhood: three strict plane tests per neighbor, combined
/// by multiplying the indicator bits (two integer multiplications — exactly
/// the surcharge the fused operator's cost model carries). One plane's
/// test is tallied as the modeled comparison/subtraction; the other two go
/// to the fusion surcharge group.
fn fused_label(centers: &[f64; 3], rings: &[Vec<f64>; 3], params: &OperatorParams, meter: &mut Meter) -> u32 {
    let p = params.p;
    let mut code = 0u64;
    let mut pop = 0u32;
    for k in 0..p as usize {
        let mut bit = 0u64;
        for pl in 0..3 {
            let d = rings[pl][k] - centers[pl];
            let b = (d > 0.0) as u64;
            if pl == 0 {
                meter.modeled.subtractions += 1;
                meter.modeled.comparisons += 1;
                bit = b;
            } else {
                meter.aux.fusion_extra.subtractions += 1;
                meter.aux.fusion_extra.comparisons += 1;
                bit *= b;
                meter.modeled.multiplications += 1;
            }
        }
        code |= bit << k;
        meter.modeled.additions += 1;
        pop += bit as u32;
        meter.aux.labeling.additions += 1;
    }
    meter.aux.labeling.comparisons += p as u64 + 1;
    if lbp::uniformity(LbpCode { value: code, p }) <= params.u_t {
        pop
    } else {
        p + 1
    }
}

/// Which histogram blocks a descriptor carries per ring geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSelection {
    /// Three per-plane blocks plus the fused block: `4 * (P + 2)` bins.
    #[default]
    Full,
    /// Only the per-plane blocks: `3 * (P + 2)` bins.
    PerPlane,
    /// Only the fused block: `P + 2` bins.
    FusedOnly,
}

impl BlockSelection {
    pub fn label(self) -> &'static str {
        match self {
            BlockSelection::Full => "full",
            BlockSelection::PerPlane => "per-plane",
            BlockSelection::FusedOnly => "fused-only",
        }
    }

    fn blocks_per_scale(self) -> usize {
        match self {
            BlockSelection::Full => 4,
            BlockSelection::PerPlane => 3,
            BlockSelection::FusedOnly => 1,
        }
    }
}

/// Per-plane and fused histograms for one ring geometry.
///
/// Blocks are named `r`, `g`, `b`, and (when `include_fused`) `fused`, in
/// that order. When `mask` is given, all blocks honor it.
///
/// # Examples
///
/// ```
/// use hclbp::fusion::color_descriptor;
/// use hclbp::raster::{GrayPlane, OperatorParams, RgbImage};
///
/// let image = RgbImage::from_gray(GrayPlane::filled(8, 8, 50).unwrap());
/// let params = OperatorParams::new(8, 1).unwrap();
/// let d = color_descriptor(&image, &params, true, None).unwrap();
/// assert_eq!(d.len(), 40);
/// assert_eq!(d.bins[8], 1.0);  // flat gray plane: every plane label is P
/// assert_eq!(d.bins[30], 1.0); // flat fused: every label is 0
/// ```
pub fn color_descriptor(
    image: &RgbImage,
    params: &OperatorParams,
    include_fused: bool,
    mask: Option<&SignificanceMask>,
) -> Result<Descriptor> {
    let selection = if include_fused { BlockSelection::Full } else { BlockSelection::PerPlane };
    scale_descriptor(image, params, selection, mask)
}

fn scale_descriptor(
    image: &RgbImage,
    params: &OperatorParams,
    selection: BlockSelection,
    mask: Option<&SignificanceMask>,
) -> Result<Descriptor> {
    let mut d = Descriptor::new();
    let sps = mask.is_some();
    if selection != BlockSelection::FusedOnly {
        for (pl, name) in ["r", "g", "b"].iter().enumerate() {
            let map = lbp::label_map(image.plane(pl), params, mask)?;
            let bins = crate::lbp::label_histogram(&map, params)?;
            d.push_block(name, params, sps, bins.bins);
        }
    }
    if selection != BlockSelection::PerPlane {
        let map = hclbp_label_map(image, params, mask)?;
        let bins = crate::lbp::label_histogram(&map, params)?;
        d.push_block("fused", params, sps, bins.bins);
    }
    Ok(d)
}

/// Everything that determines a descriptor's values and layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    /// Ring geometries, in descriptor order.
    pub schedule: Vec<OperatorParams>,
    pub blocks: BlockSelection,
    /// Gate every block with a significant-points mask (computed on the
    /// mean plane, per geometry).
    pub sps: bool,
    pub lsv_mode: LsvMode,
}

impl Default for ExtractorConfig {
    /// Two-scale default: an 8-neighbor radius-1 ring plus a 16-neighbor
    /// radius-2 ring, all blocks, no selection — 112 bins.
    fn default() -> Self {
        Self {
            schedule: vec![
                OperatorParams::new(8, 1).expect("valid default ring"),
                OperatorParams::new(16, 2).expect("valid default ring"),
            ],
            blocks: BlockSelection::Full,
            sps: false,
            lsv_mode: LsvMode::Absolute,
        }
    }
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::BadSchedule("schedule has no ring geometries".into()));
        }
        for (i, a) in self.schedule.iter().enumerate() {
            for b in &self.schedule[..i] {
                if a.p == b.p && a.r == b.r {
                    return Err(Error::BadSchedule(format!(
                        "duplicate ring geometry p={} r={}",
                        a.p, a.r
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total bin count a descriptor built from this config will have.
    pub fn descriptor_len(&self) -> usize {
        self.schedule
            .iter()
            .map(|params| self.blocks.blocks_per_scale() * (params.p as usize + 2))
            .sum()
    }

    /// Short stable fingerprint of the config (first 16 hex characters of
    /// the digest of its canonical JSON form) — used to key descriptor
    /// caches so a config change never reuses stale vectors.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Full descriptor for an image under a config: per ring geometry, the
/// selected blocks, optionally gated by a fresh significance mask.
pub fn extract(image: &RgbImage, config: &ExtractorConfig) -> Result<Descriptor> {
    config.validate()?;
    let mut d = Descriptor::new();
    for params in &config.schedule {
        let mask = if config.sps {
            Some(significance_mask(&mean_plane(image), params, config.lsv_mode)?)
        } else {
            None
        };
        let scale = scale_descriptor(image, params, config.blocks, mask.as_ref())?;
        d.extend(&scale);
    }
    Ok(d)
}
