//! Single-plane local binary patterns: codes, rotation canonicalization,
//! uniformity, riu labels, label maps, and normalized label histograms.
//!
//! A neighbor contributes bit `k = 1` when its (possibly interpolated) value
//! is greater than or equal to the center — ties count as 1, so constant
//! regions produce the all-ones code. Rotation invariance comes from labeling
//! rather than canonicalization: a pattern whose circular 0/1 transition
//! count is at most the uniformity threshold is labeled by its popcount,
//! everything else collapses into the miscellaneous label `P + 1`, giving
//! `P + 2` labels total.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::opcount::Meter;
use crate::raster::{GrayPlane, NeighborhoodSample, OperatorParams, Sampler};
use crate::sps::SignificanceMask;

/// Sign indicator: 1 when `x >= 0` (ties count as 1), else 0.
#[inline]
pub fn omega(x: f64) -> u64 {
    (x >= 0.0) as u64
}

/// A `P`-bit ring pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LbpCode {
    pub value: u64,
    pub p: u32,
}

impl LbpCode {
    pub fn new(value: u64, p: u32) -> Result<Self> {
        if !(4..=32).contains(&p) {
            return Err(Error::BadParams(format!("ring width {p} outside 4..=32")));
        }
        if value >> p != 0 {
            return Err(Error::BadParams(format!("code {value:#b} wider than {p} bits")));
        }
        Ok(Self { value, p })
    }

    /// Circular right rotation within the `P`-bit ring.
    pub fn ror(&self, n: u32) -> LbpCode {
        let n = n % self.p;
        if n == 0 {
            return *self;
        }
        let mask = if self.p == 64 { u64::MAX } else { (1u64 << self.p) - 1 };
        let value = ((self.value >> n) | (self.value << (self.p - n))) & mask;
        LbpCode { value, p: self.p }
    }

    pub fn popcount(&self) -> u32 {
        self.value.count_ones()
    }
}

/// Raw ring code: bit `k` is `omega(f_k - f_c)`.
///
/// # Examples
///
/// ```
/// use hclbp::lbp::lbp_code;
/// use hclbp::raster::NeighborhoodSample;
///
/// let s = NeighborhoodSample {
///     center: 5.0,
///     neighbors: vec![7.0, 3.0, 3.0, 3.0, 7.0, 3.0, 3.0, 3.0],
/// };
/// assert_eq!(lbp_code(&s).value, 0b0001_0001); // bits 0 and 4
/// ```
pub fn lbp_code(sample: &NeighborhoodSample) -> LbpCode {
    let p = sample.neighbors.len() as u32;
    let mut value = 0u64;
    for (k, &n) in sample.neighbors.iter().enumerate() {
        value |= omega(n - sample.center) << k;
    }
    LbpCode { value, p }
}

/// Smallest value among all circular rotations — the rotation-canonical form.
///
/// # Examples
///
/// ```
/// use hclbp::lbp::{ror_min, LbpCode};
///
/// let c = LbpCode::new(0b1000_0000, 8).unwrap();
/// assert_eq!(ror_min(c).value, 1);
/// ```
pub fn ror_min(code: LbpCode) -> LbpCode {
    (0..code.p).map(|n| code.ror(n)).min_by_key(|c| c.value).unwrap_or(code)
}

/// Circular 0/1 transition count around the ring.
///
/// # Examples
///
/// ```
/// use hclbp::lbp::{uniformity, LbpCode};
///
/// assert_eq!(uniformity(LbpCode::new(0b0100_1100, 8).unwrap()), 4);
/// assert_eq!(uniformity(LbpCode::new(0b1100_0001, 8).unwrap()), 2);
/// ```
pub fn uniformity(code: LbpCode) -> u32 {
    (code.value ^ code.ror(1).value).count_ones()
}

/// Rotation-invariant uniform label for a code: popcount when the transition
/// count is within the threshold, else the miscellaneous label `P + 1`.
pub fn riu_label_from_code(code: LbpCode, u_t: u32) -> u32 {
    if uniformity(code) <= u_t {
        code.popcount()
    } else {
        code.p + 1
    }
}

/// Rotation-invariant uniform label for a sampled neighborhood.
pub fn riu_label(sample: &NeighborhoodSample, params: &OperatorParams) -> u32 {
    riu_label_from_code(lbp_code(sample), params.u_t)
}

/// Labels for every interior pixel of a plane; `None` where a selection mask
/// excluded the point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<Option<u16>>,
}

impl LabelMap {
    /// Build from raw labels, row-major over the interior grid.
    pub fn from_labels(width: u32, height: u32, labels: Vec<Option<u16>>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::BadPlaneLength { width, height, len: labels.len() });
        }
        Ok(Self { width, height, labels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, ix: u32, iy: u32) -> Option<u16> {
        self.labels[iy as usize * self.width as usize + ix as usize]
    }

    pub fn labels(&self) -> &[Option<u16>] {
        &self.labels
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }
}

/// riu label map over the interior of a plane. When `mask` is given it must
/// match the interior dimensions; unselected points are skipped entirely
/// (no sampling, no labeling) and stay `None`.
pub fn label_map(
    plane: &GrayPlane,
    params: &OperatorParams,
    mask: Option<&SignificanceMask>,
) -> Result<LabelMap> {
    label_map_metered(plane, params, mask, &mut Meter::new())
}

pub(crate) fn label_map_metered(
    plane: &GrayPlane,
    params: &OperatorParams,
    mask: Option<&SignificanceMask>,
    meter: &mut Meter,
) -> Result<LabelMap> {
    let (iw, ih) = params.interior(plane.width(), plane.height())?;
    check_mask(mask, iw, ih)?;
    let r = params.r;
    let sampler = Sampler::new(params);
    let mut labels = Vec::with_capacity(iw as usize * ih as usize);
    let mut ring = Vec::with_capacity(params.p as usize);
    for iy in 0..ih {
        for ix in 0..iw {
            if let Some(m) = mask {
                if !m.selected(ix, iy) {
                    labels.push(None);
                    continue;
                }
            }
            sampler.sample_into(plane, ix + r, iy + r, &mut ring, &mut meter.aux.interpolation);
            let center = plane.get(ix + r, iy + r) as f64;
            let label = label_one(center, &ring, params.u_t, meter, |d, m| {
                m.modeled.comparisons += 1;
                omega(d)
            });
            labels.push(Some(label as u16));
        }
    }
    LabelMap::from_labels(iw, ih, labels)
}

pub(crate) fn check_mask(mask: Option<&SignificanceMask>, iw: u32, ih: u32) -> Result<()> {
    if let Some(m) = mask {
        if m.width() != iw || m.height() != ih {
            return Err(Error::MaskMismatch { mw: m.width(), mh: m.height(), w: iw, h: ih });
        }
    }
    Ok(())
}

/// Shared labeling loop: applies a per-neighbor bit rule to the ring, then
/// the uniformity threshold. The bit rule receives the difference it is
/// judging and the meter, so the fused operator can tally its extra
/// per-plane arithmetic.
pub(crate) fn label_one(
    center: f64,
    ring: &[f64],
    u_t: u32,
    meter: &mut Meter,
    mut bit_of: impl FnMut(f64, &mut Meter) -> u64,
) -> u32 {
    let p = ring.len() as u32;
    let mut code = 0u64;
    let mut pop = 0u32;
    for (k, &n) in ring.iter().enumerate() {
        let d = n - center;
        meter.modeled.subtractions += 1;
        let bit = bit_of(d, meter);
        code |= bit << k;
        meter.modeled.additions += 1;
        pop += bit as u32;
        meter.aux.labeling.additions += 1;
    }
    // Transition count is p pairwise bit tests plus the threshold test.
    meter.aux.labeling.comparisons += p as u64 + 1;
    let u = uniformity(LbpCode { value: code, p });
    if u <= u_t {
        pop
    } else {
        p + 1
    }
}

/// Normalized label histogram: `P + 2` bins, each the fraction of labeled
/// pixels carrying that label. Errors when nothing is labeled.
///
/// # Examples
///
/// ```
/// use hclbp::lbp::{label_histogram, label_map};
/// use hclbp::raster::{GrayPlane, OperatorParams};
///
/// let plane = GrayPlane::filled(6, 6, 42).unwrap();
/// let params = OperatorParams::new(8, 1).unwrap();
/// let map = label_map(&plane, &params, None).unwrap();
/// let d = label_histogram(&map, &params).unwrap();
/// assert_eq!(d.bins.len(), 10);
/// assert_eq!(d.bins[8], 1.0); // constant plane: every label is P
/// ```
pub fn label_histogram(map: &LabelMap, params: &OperatorParams) -> Result<Descriptor> {
    let bins = histogram_bins_metered(map, params, &mut Meter::new())?;
    let mut d = Descriptor::new();
    d.push_block("gray", params, false, bins);
    Ok(d)
}

pub(crate) fn histogram_bins_metered(
    map: &LabelMap,
    params: &OperatorParams,
    meter: &mut Meter,
) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; params.p as usize + 2];
    let mut total = 0u64;
    for label in map.labels().iter().flatten() {
        counts[*label as usize] += 1;
        total += 1;
        meter.aux.histogram.additions += 2;
    }
    if total == 0 {
        return Err(Error::EmptyLabelMap);
    }
    meter.aux.histogram.divisions += counts.len() as u64;
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// One named block inside a descriptor: which operator pass produced which
/// bin range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMeta {
    pub name: String,
    pub p: u32,
    pub r: u32,
    /// Whether a significance mask gated this block's label map.
    pub sps: bool,
    pub offset: usize,
    pub len: usize,
}

/// A concatenation of normalized histogram blocks. Each block sums to 1
/// (within float tolerance); the block list records names, parameters, and
/// bin ranges.
///
/// JSON serialization nests bins under their blocks and is the canonical
/// interchange form; values round-trip bit-exactly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Descriptor {
    pub bins: Vec<f64>,
    pub blocks: Vec<BlockMeta>,
}

/// Histograms normalize by the labeled-pixel count (not the full pixel
/// count), so blocks sum to 1 even under selection masks; artifacts record
/// this normalization by name.
pub const NORMALIZATION: &str = "labeled-count";

impl Descriptor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_block(&mut self, name: &str, params: &OperatorParams, sps: bool, bins: Vec<f64>) {
        self.blocks.push(BlockMeta {
            name: name.to_string(),
            p: params.p,
            r: params.r,
            sps,
            offset: self.bins.len(),
            len: bins.len(),
        });
        self.bins.extend(bins);
    }

    pub fn block_bins(&self, i: usize) -> &[f64] {
        let b = &self.blocks[i];
        &self.bins[b.offset..b.offset + b.len]
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Append another descriptor's blocks (bin ranges are re-offset).
    pub fn extend(&mut self, other: &Descriptor) {
        for (i, b) in other.blocks.iter().enumerate() {
            let mut b = b.clone();
            b.offset = self.bins.len();
            self.bins.extend_from_slice(other.block_bins(i));
            self.blocks.push(b);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    name: String,
    p: u32,
    r: u32,
    sps: bool,
    bins: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DescriptorJson {
    normalization: String,
    blocks: Vec<BlockJson>,
}

impl Serialize for Descriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| BlockJson {
                name: b.name.clone(),
                p: b.p,
                r: b.r,
                sps: b.sps,
                bins: self.block_bins(i).to_vec(),
            })
            .collect();
        DescriptorJson { normalization: NORMALIZATION.to_string(), blocks }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Descriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = DescriptorJson::deserialize(deserializer)?;
        if raw.normalization != NORMALIZATION {
            return Err(D::Error::custom(format!("unknown normalization {:?}", raw.normalization)));
        }
        let mut d = Descriptor::new();
        for b in raw.blocks {
            let params = OperatorParams::new(b.p, b.r).map_err(D::Error::custom)?;
            d.push_block(&b.name, &params, b.sps, b.bins);
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::sample_neighborhood;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // ---- independent oracles -------------------------------------------

    fn bits_of(code: u64, p: u32) -> Vec<u8> {
        (0..p).map(|k| ((code >> k) & 1) as u8).collect()
    }

    /// Transition count straight from the definition:
    /// |b_0 - b_{P-1}| + sum |b_k - b_{k-1}|.
    fn oracle_transitions(bits: &[u8]) -> u32 {
        let p = bits.len();
        let mut u = (bits[0] as i32 - bits[p - 1] as i32).unsigned_abs();
        for k in 1..p {
            u += (bits[k] as i32 - bits[k - 1] as i32).unsigned_abs();
        }
        u
    }

    /// Minimum rotation by rotating the bit array itself.
    fn oracle_ror_min(code: u64, p: u32) -> u64 {
        let bits = bits_of(code, p);
        (0..p as usize)
            .map(|n| {
                let mut v = 0u64;
                for k in 0..p as usize {
                    v |= (bits[(k + n) % p as usize] as u64) << k;
                }
                v
            })
            .min()
            .unwrap()
    }

    /// Label straight from the definitions, sample level.
    fn oracle_label(sample: &NeighborhoodSample, u_t: u32) -> u32 {
        let p = sample.neighbors.len() as u32;
        let bits: Vec<u8> =
            sample.neighbors.iter().map(|&n| if n - sample.center >= 0.0 { 1 } else { 0 }).collect();
        if oracle_transitions(&bits) <= u_t {
            bits.iter().map(|&b| b as u32).sum()
        } else {
            p + 1
        }
    }

    /// Plain-formula bilinear read of a plane at a real position, with the
    /// same 1e-8 integer snap the sampling convention documents.
    fn oracle_read(plane: &GrayPlane, mut sx: f64, mut sy: f64) -> f64 {
        if (sx - sx.round()).abs() < 1e-8 {
            sx = sx.round();
        }
        if (sy - sy.round()).abs() < 1e-8 {
            sy = sy.round();
        }
        if sx.fract() == 0.0 && sy.fract() == 0.0 {
            return plane.get(sx as u32, sy as u32) as f64;
        }
        let (x0, y0) = (sx.floor(), sy.floor());
        let (dx, dy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as u32, y0 as u32);
        let p00 = plane.get(x0, y0) as f64;
        let p10 = plane.get(x0 + 1, y0) as f64;
        let p01 = plane.get(x0, y0 + 1) as f64;
        let p11 = plane.get(x0 + 1, y0 + 1) as f64;
        (1.0 - dx) * (1.0 - dy) * p00 + dx * (1.0 - dy) * p10 + (1.0 - dx) * dy * p01 + dx * dy * p11
    }

    /// Code for the center of a 3x3 patch, everything recomputed literally.
    fn oracle_patch_code(plane: &GrayPlane, p: u32) -> u64 {
        let c = plane.get(1, 1) as f64;
        let mut code = 0u64;
        for k in 0..p {
            let a = std::f64::consts::TAU * k as f64 / p as f64;
            let v = oracle_read(plane, 1.0 + a.cos(), 1.0 - a.sin());
            if v - c >= 0.0 {
                code |= 1 << k;
            }
        }
        code
    }

    // ---- frozen examples ------------------------------------------------

    #[test]
    fn omega_ties_count_as_one() {
        assert_eq!(omega(0.0), 1);
        assert_eq!(omega(3.0), 1);
        assert_eq!(omega(-0.5), 0);
    }

    #[test]
    fn code_from_sample() {
        let all_up = NeighborhoodSample { center: 10.0, neighbors: vec![11.0; 8] };
        assert_eq!(lbp_code(&all_up).value, 255);
        let all_down = NeighborhoodSample { center: 10.0, neighbors: vec![9.0; 8] };
        assert_eq!(lbp_code(&all_down).value, 0);
        let mixed = NeighborhoodSample {
            center: 5.0,
            neighbors: vec![7.0, 3.0, 3.0, 3.0, 7.0, 3.0, 3.0, 3.0],
        };
        assert_eq!(lbp_code(&mixed).value, 17);
    }

    #[test]
    fn ror_min_examples() {
        let c = |v| LbpCode::new(v, 8).unwrap();
        assert_eq!(ror_min(c(0b1000_0000)).value, 1);
        assert_eq!(ror_min(c(0)).value, 0);
        assert_eq!(ror_min(c(255)).value, 255);
    }

    #[test]
    fn uniformity_examples() {
        let c = |v| LbpCode::new(v, 8).unwrap();
        assert_eq!(uniformity(c(0b0100_1100)), 4);
        assert_eq!(uniformity(c(0b1100_0001)), 2);
        assert_eq!(uniformity(c(0)), 0);
        assert_eq!(uniformity(c(255)), 0);
    }

    #[test]
    fn riu_label_examples() {
        let all_up = NeighborhoodSample { center: 10.0, neighbors: vec![11.0; 8] };
        let params = OperatorParams::new(8, 1).unwrap();
        assert_eq!(riu_label(&all_up, &params), 8);
        assert_eq!(riu_label_from_code(LbpCode::new(0b0100_1100, 8).unwrap(), 2), 9);
        assert_eq!(riu_label_from_code(LbpCode::new(0b1100_0001, 8).unwrap(), 2), 3);
    }

    #[test]
    fn code_validation() {
        assert!(LbpCode::new(0b1_0000_0000, 8).is_err());
        assert!(LbpCode::new(1, 3).is_err());
        assert!(LbpCode::new(u32::MAX as u64, 32).is_ok());
    }

    // ---- exhaustive enumeration for P = 8 --------------------------------

    #[test]
    fn exhaustive_eight_bit_codes_match_oracles() {
        let mut uniform = 0;
        let mut classes = std::collections::BTreeSet::new();
        for v in 0..256u64 {
            let code = LbpCode::new(v, 8).unwrap();
            let bits = bits_of(v, 8);
            assert_eq!(uniformity(code), oracle_transitions(&bits), "code {v:#010b}");
            assert_eq!(ror_min(code).value, oracle_ror_min(v, 8), "code {v:#010b}");

            let label = riu_label_from_code(code, 2);
            if uniformity(code) <= 2 {
                assert_eq!(label, code.popcount());
                uniform += 1;
                classes.insert(ror_min(code).value);
            } else {
                assert_eq!(label, 9);
            }
        }
        // 0, 255, and eight rotations of each run length 1..=7.
        assert_eq!(uniform, 58);
        assert_eq!(classes.len(), 9);
    }

    // ---- label maps and histograms ---------------------------------------

    #[test]
    fn constant_plane_labels_all_p() {
        let plane = GrayPlane::filled(4, 4, 9).unwrap();
        let params = OperatorParams::new(8, 1).unwrap();
        let map = label_map(&plane, &params, None).unwrap();
        assert_eq!((map.width(), map.height()), (2, 2));
        assert!(map.labels().iter().all(|l| *l == Some(8)));
    }

    #[test]
    fn interior_shrinks_with_radius() {
        let plane = GrayPlane::filled(5, 5, 0).unwrap();
        let params = OperatorParams::new(16, 2).unwrap();
        let map = label_map(&plane, &params, None).unwrap();
        assert_eq!((map.width(), map.height()), (1, 1));
        assert_eq!(map.labeled_count(), 1);
    }

    #[test]
    fn empty_mask_yields_empty_map_then_histogram_error() {
        let plane = GrayPlane::filled(5, 5, 0).unwrap();
        let params = OperatorParams::new(8, 1).unwrap();
        let mask = SignificanceMask::from_grid(3, 3, vec![false; 9]).unwrap();
        let map = label_map(&plane, &params, Some(&mask)).unwrap();
        assert_eq!(map.labeled_count(), 0);
        assert!(matches!(label_histogram(&map, &params), Err(Error::EmptyLabelMap)));
    }

    #[test]
    fn mask_dimensions_must_match_interior() {
        let plane = GrayPlane::filled(5, 5, 0).unwrap();
        let params = OperatorParams::new(8, 1).unwrap();
        let mask = SignificanceMask::from_grid(2, 3, vec![true; 6]).unwrap();
        assert!(matches!(label_map(&plane, &params, Some(&mask)), Err(Error::MaskMismatch { .. })));
    }

    #[test]
    fn histogram_from_known_labels() {
        let params = OperatorParams::new(8, 1).unwrap();
        let map = LabelMap::from_labels(2, 2, vec![Some(3), Some(9), Some(9), Some(9)]).unwrap();
        let d = label_histogram(&map, &params).unwrap();
        assert_eq!(d.bins.len(), 10);
        assert_eq!(d.bins[3], 0.25);
        assert_eq!(d.bins[9], 0.75);

        // None entries are excluded from the denominator.
        let map = LabelMap::from_labels(2, 2, vec![Some(3), None, None, Some(9)]).unwrap();
        let d = label_histogram(&map, &params).unwrap();
        assert_eq!(d.bins[3], 0.5);
        assert_eq!(d.bins[9], 0.5);
    }

    // ---- property tests ---------------------------------------------------

    fn sample_strategy(p: usize) -> impl Strategy<Value = NeighborhoodSample> {
        (0u8..=255, proptest::collection::vec(0u8..=255, p)).prop_map(|(c, n)| NeighborhoodSample {
            center: c as f64,
            neighbors: n.into_iter().map(|v| v as f64).collect(),
        })
    }

    fn small_plane() -> impl Strategy<Value = GrayPlane> {
        (4u32..=9, 4u32..=9)
            .prop_flat_map(|(w, h)| {
                proptest::collection::vec(0u8..=255, (w * h) as usize)
                    .prop_map(move |data| GrayPlane::new(w, h, data).unwrap())
            })
    }

    proptest! {
        #[test]
        fn labels_agree_with_sample_oracle(s in sample_strategy(8)) {
            let params = OperatorParams::new(8, 1).unwrap();
            prop_assert_eq!(riu_label(&s, &params), oracle_label(&s, 2));
        }

        #[test]
        fn labels_are_invariant_under_ring_shift(s in sample_strategy(8), shift in 0usize..8) {
            let params = OperatorParams::new(8, 1).unwrap();
            let mut rotated = s.clone();
            rotated.neighbors.rotate_left(shift);
            prop_assert_eq!(riu_label(&s, &params), riu_label(&rotated, &params));
        }

        #[test]
        fn ror_min_is_idempotent_and_rotation_invariant(v in 0u64..=255, n in 0u32..8) {
            let code = LbpCode::new(v, 8).unwrap();
            let canon = ror_min(code);
            prop_assert_eq!(ror_min(canon), canon);
            prop_assert_eq!(ror_min(code.ror(n)).value, canon.value);
        }

        #[test]
        fn histogram_is_a_distribution(plane in small_plane()) {
            let params = OperatorParams::new(8, 1).unwrap();
            let map = label_map(&plane, &params, None).unwrap();
            let d = label_histogram(&map, &params).unwrap();
            prop_assert_eq!(d.bins.len(), 10);
            prop_assert!(d.bins.iter().all(|&b| b >= 0.0));
            let total: f64 = d.bins.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "sum {total}");
        }

        #[test]
        fn labels_ignore_uniform_intensity_shift(plane in small_plane(), c in 0u8..=40) {
            // Shift without clipping: cap the base plane first.
            let capped: Vec<u8> = plane.data().iter().map(|&v| v.min(255 - c)).collect();
            let base = GrayPlane::new(plane.width(), plane.height(), capped).unwrap();
            let shifted_data: Vec<u8> = base.data().iter().map(|&v| v + c).collect();
            let shifted = GrayPlane::new(plane.width(), plane.height(), shifted_data).unwrap();
            let params = OperatorParams::new(8, 1).unwrap();
            prop_assert_eq!(
                label_map(&base, &params, None).unwrap(),
                label_map(&shifted, &params, None).unwrap()
            );
        }

        #[test]
        fn histogram_survives_quarter_turns(plane in small_plane()) {
            let params = OperatorParams::new(8, 1).unwrap();
            let d = label_histogram(&label_map(&plane, &params, None).unwrap(), &params).unwrap();
            let rot = plane.rotate90();
            let d_rot = label_histogram(&label_map(&rot, &params, None).unwrap(), &params).unwrap();
            for (a, b) in d.bins.iter().zip(&d_rot.bins) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn descriptor_json_round_trips_bit_exactly(
            bins in proptest::collection::vec(0.0f64..1.0, 10)
        ) {
            let params = OperatorParams::new(8, 1).unwrap();
            let mut d = Descriptor::new();
            d.push_block("gray", &params, false, bins);
            let json = serde_json::to_string(&d).unwrap();
            let back: Descriptor = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, d);
        }
    }

    #[test]
    fn patch_oracle_matches_full_pipeline() {
        // 10^4 random 3x3 patches: the sampled code must match a literal
        // recomputation (angles, plain-formula bilinear, sign sum).
        let params = OperatorParams::new(8, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..10_000 {
            let data: Vec<u8> = (0..9).map(|_| rng.random()).collect();
            let plane = GrayPlane::new(3, 3, data).unwrap();
            let s = sample_neighborhood(&plane, 1, 1, &params).unwrap();
            assert_eq!(
                lbp_code(&s).value,
                oracle_patch_code(&plane, 8),
                "trial {trial}, plane {:?}",
                plane.data()
            );
            assert_eq!(riu_label(&s, &params), oracle_label(&s, params.u_t));
        }
    }
}
