//! Significant points selection: keep only pixels whose neighborhood
//! contrast beats the image-wide average.
//!
//! The local significance value (LSV) of a pixel is the mean magnitude of
//! its ring of neighbor-minus-center differences; the global significance
//! value (GSV) is the mean LSV over the whole interior. A pixel is selected
//! when its LSV strictly exceeds the GSV. Low-contrast regions — which is
//! where impulse noise does the most damage to binary patterns — therefore
//! drop out of the histogram.
//!
//! The strict comparison means a perfectly uniform image selects nothing;
//! rather than hand an empty histogram downstream, the mask falls back to
//! selecting everything and says so via [`SignificanceMask::fallback`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcount::Meter;
use crate::raster::{GrayPlane, NeighborhoodSample, OperatorParams, Sampler};

/// How neighbor differences are aggregated into a local significance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsvMode {
    /// Mean of `|f_k - f_c|` — contrast regardless of direction (default).
    #[default]
    Absolute,
    /// Mean of `f_k - f_c` — a brightness gradient measure; opposing
    /// differences cancel.
    Signed,
}

/// Per-interior-pixel selection grid plus the statistics that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMask {
    width: u32,
    height: u32,
    selected: Vec<bool>,
    /// Global significance value the selection was thresholded against.
    pub gsv: f64,
    /// True when no pixel beat the GSV and the mask reverted to all-selected.
    pub fallback: bool,
}

impl SignificanceMask {
    /// Raw constructor (used by tests and external mask sources); `gsv` is
    /// zeroed and `fallback` false since neither is derivable from a grid.
    pub fn from_grid(width: u32, height: u32, selected: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if selected.len() != width as usize * height as usize {
            return Err(Error::BadPlaneLength { width, height, len: selected.len() });
        }
        Ok(Self { width, height, selected, gsv: 0.0, fallback: false })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Whether interior point `(ix, iy)` survives selection.
    pub fn selected(&self, ix: u32, iy: u32) -> bool {
        self.selected[iy as usize * self.width as usize + ix as usize]
    }

    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|s| **s).count()
    }

    /// Render as a plane (255 selected, 0 not) for PGM export.
    pub fn to_gray(&self) -> GrayPlane {
        let data = self.selected.iter().map(|&s| if s { 255 } else { 0 }).collect();
        GrayPlane::new(self.width, self.height, data).expect("mask dimensions already validated")
    }
}

/// LSV of an already-sampled neighborhood.
///
/// # Examples
///
/// ```
/// use hclbp::raster::NeighborhoodSample;
/// use hclbp::sps::{lsv_of_sample, LsvMode};
///
/// let s = NeighborhoodSample {
///     center: 10.0,
///     neighbors: vec![6.0, 14.0, 6.0, 14.0, 6.0, 14.0, 6.0, 14.0],
/// };
/// assert_eq!(lsv_of_sample(&s, LsvMode::Absolute), 4.0);
/// assert_eq!(lsv_of_sample(&s, LsvMode::Signed), 0.0);
/// ```
pub fn lsv_of_sample(sample: &NeighborhoodSample, mode: LsvMode) -> f64 {
    let mut acc = 0.0;
    for &n in &sample.neighbors {
        let d = n - sample.center;
        acc += match mode {
            LsvMode::Absolute => d.abs(),
            LsvMode::Signed => d,
        };
    }
    acc / sample.neighbors.len() as f64
}

/// LSV of one interior pixel of a plane.
pub fn lsv(plane: &GrayPlane, x: u32, y: u32, params: &OperatorParams, mode: LsvMode) -> Result<f64> {
    let sample = crate::raster::sample_neighborhood(plane, x, y, params)?;
    Ok(lsv_of_sample(&sample, mode))
}

/// GSV: mean LSV over the plane's interior.
pub fn gsv(plane: &GrayPlane, params: &OperatorParams, mode: LsvMode) -> Result<f64> {
    let (values, g) = lsv_field(plane, params, mode, &mut Meter::new())?;
    let _ = values;
    Ok(g)
}

/// Selection mask for a plane: interior pixels whose LSV strictly exceeds
/// the GSV. Falls back to all-selected when that set is empty.
pub fn significance_mask(
    plane: &GrayPlane,
    params: &OperatorParams,
    mode: LsvMode,
) -> Result<SignificanceMask> {
    significance_mask_metered(plane, params, mode, &mut Meter::new())
}

pub(crate) fn significance_mask_metered(
    plane: &GrayPlane,
    params: &OperatorParams,
    mode: LsvMode,
    meter: &mut Meter,
) -> Result<SignificanceMask> {
    let (iw, ih) = params.interior(plane.width(), plane.height())?;
    let (values, g) = lsv_field(plane, params, mode, meter)?;
    meter.aux.selection.comparisons += values.len() as u64;
    let mut selected: Vec<bool> = values.iter().map(|&v| v > g).collect();
    let fallback = !selected.iter().any(|&s| s);
    if fallback {
        selected.fill(true);
    }
    Ok(SignificanceMask { width: iw, height: ih, selected, gsv: g, fallback })
}

/// LSVs for every interior pixel (row-major) plus their mean. All selection
/// arithmetic — sampling included — is tallied under the selection counter
/// group, keeping it separate from the labeling pass it gates.
fn lsv_field(
    plane: &GrayPlane,
    params: &OperatorParams,
    mode: LsvMode,
    meter: &mut Meter,
) -> Result<(Vec<f64>, f64)> {
    let (iw, ih) = params.interior(plane.width(), plane.height())?;
    let sampler = Sampler::new(params);
    let mut ring = Vec::with_capacity(params.p as usize);
    let mut values = Vec::with_capacity(iw as usize * ih as usize);
    let mut total = 0.0;
    for iy in 0..ih {
        for ix in 0..iw {
            sampler.sample_into(plane, ix + params.r, iy + params.r, &mut ring, &mut meter.aux.selection);
            let center = plane.get(ix + params.r, iy + params.r) as f64;
            let mut acc = 0.0;
            for &n in &ring {
                let d = n - center;
                acc += match mode {
                    LsvMode::Absolute => d.abs(),
                    LsvMode::Signed => d,
                };
                meter.aux.selection.subtractions += 1;
                meter.aux.selection.additions += 1;
            }
            let v = acc / params.p as f64;
            meter.aux.selection.divisions += 1;
            total += v;
            meter.aux.selection.additions += 1;
            values.push(v);
        }
    }
    let g = total / values.len() as f64;
    meter.aux.selection.divisions += 1;
    Ok((values, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane_with(w: u32, h: u32, base: u8, overrides: &[(u32, u32, u8)]) -> GrayPlane {
        let mut p = GrayPlane::filled(w, h, base).unwrap();
        for &(x, y, v) in overrides {
            p.set(x, y, v);
        }
        p
    }

    #[test]
    fn lsv_of_uniform_lift_is_the_lift() {
        let s = NeighborhoodSample { center: 10.0, neighbors: vec![18.0; 8] };
        assert_eq!(lsv_of_sample(&s, LsvMode::Absolute), 8.0);
        assert_eq!(lsv_of_sample(&s, LsvMode::Signed), 8.0);
    }

    #[test]
    fn signed_mode_cancels_symmetric_contrast() {
        let s = NeighborhoodSample {
            center: 10.0,
            neighbors: vec![6.0, 14.0, 6.0, 14.0, 6.0, 14.0, 6.0, 14.0],
        };
        assert_eq!(lsv_of_sample(&s, LsvMode::Absolute), 4.0);
        assert_eq!(lsv_of_sample(&s, LsvMode::Signed), 0.0);
    }

    #[test]
    fn gsv_averages_interior_lsvs() {
        // 3x6, radius-1 four-neighbor ring: a 1x4 interior column whose LSVs
        // are 8, 0, 0, 8 by construction, so the GSV is exactly 4.
        let plane =
            plane_with(3, 6, 100, &[(1, 0, 116), (0, 1, 116), (0, 4, 116), (1, 5, 116)]);
        let params = OperatorParams::new(4, 1).unwrap();
        assert_eq!(lsv(&plane, 1, 1, &params, LsvMode::Absolute).unwrap(), 8.0);
        assert_eq!(lsv(&plane, 1, 2, &params, LsvMode::Absolute).unwrap(), 0.0);
        assert_eq!(gsv(&plane, &params, LsvMode::Absolute).unwrap(), 4.0);

        let mask = significance_mask(&plane, &params, LsvMode::Absolute).unwrap();
        assert_eq!(mask.gsv, 4.0);
        assert!(!mask.fallback);
        assert_eq!((mask.width(), mask.height()), (1, 4));
        let grid: Vec<bool> = (0..4).map(|iy| mask.selected(0, iy)).collect();
        assert_eq!(grid, [true, false, false, true]);
        assert_eq!(mask.selected_count(), 2);
    }

    #[test]
    fn constant_plane_falls_back_to_all_selected() {
        let plane = GrayPlane::filled(8, 8, 77).unwrap();
        let params = OperatorParams::new(8, 1).unwrap();
        let mask = significance_mask(&plane, &params, LsvMode::Absolute).unwrap();
        assert!(mask.fallback);
        assert_eq!(mask.gsv, 0.0);
        assert_eq!(mask.selected_count(), 36);
    }

    #[test]
    fn single_interior_pixel_cannot_beat_its_own_mean() {
        // One interior pixel: its LSV equals the GSV, the strict comparison
        // selects nothing, and the fallback kicks in.
        let plane = plane_with(3, 3, 10, &[(0, 0, 200), (2, 2, 40)]);
        let params = OperatorParams::new(8, 1).unwrap();
        let mask = significance_mask(&plane, &params, LsvMode::Absolute).unwrap();
        assert!(mask.fallback);
        assert_eq!(mask.selected_count(), 1);
        assert!(mask.selected(0, 0));
    }

    #[test]
    fn bright_patch_on_flat_field_selects_only_its_rim() {
        // A 4x4 patch of 200 on a 16x16 field of 50. Compare against a
        // literal recomputation and sanity-check the geometry: selection
        // hugs the contrast boundary.
        let mut plane = GrayPlane::filled(16, 16, 50).unwrap();
        for y in 6..10 {
            for x in 6..10 {
                plane.set(x, y, 200);
            }
        }
        let params = OperatorParams::new(8, 1).unwrap();
        let mask = significance_mask(&plane, &params, LsvMode::Absolute).unwrap();
        assert!(!mask.fallback);
        assert!(mask.gsv > 0.0);

        let mut expected = Vec::new();
        let mut lsvs = Vec::new();
        for iy in 0..14 {
            for ix in 0..14 {
                lsvs.push(lsv(&plane, ix + 1, iy + 1, &params, LsvMode::Absolute).unwrap());
            }
        }
        let g: f64 = lsvs.iter().sum::<f64>() / lsvs.len() as f64;
        for &v in &lsvs {
            expected.push(v > g);
        }
        for iy in 0..14u32 {
            for ix in 0..14u32 {
                let want = expected[(iy * 14 + ix) as usize];
                assert_eq!(mask.selected(ix, iy), want, "interior ({ix}, {iy})");
                if want {
                    // Selected pixels sit within one step of the 50/200 rim.
                    let (x, y) = (ix + 1, iy + 1);
                    let near = (5..=10).contains(&x)
                        && (5..=10).contains(&y)
                        && !((7..=8).contains(&x) && (7..=8).contains(&y));
                    assert!(near, "unexpected selected pixel at ({x}, {y})");
                }
            }
        }
        assert!(mask.selected_count() > 0);
        assert!(mask.selected_count() < 14 * 14 / 2);
    }

    #[test]
    fn grid_constructor_validates_shape() {
        assert!(SignificanceMask::from_grid(2, 2, vec![true; 3]).is_err());
        assert!(SignificanceMask::from_grid(0, 2, vec![]).is_err());
        let m = SignificanceMask::from_grid(2, 1, vec![true, false]).unwrap();
        assert_eq!(m.to_gray().data(), &[255, 0]);
    }

    fn small_plane() -> impl Strategy<Value = GrayPlane> {
        (4u32..=9, 4u32..=9).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0u8..=255, (w * h) as usize)
                .prop_map(move |data| GrayPlane::new(w, h, data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn selection_ignores_uniform_intensity_shift(plane in small_plane(), c in 0u8..=40) {
            let capped: Vec<u8> = plane.data().iter().map(|&v| v.min(255 - c)).collect();
            let base = GrayPlane::new(plane.width(), plane.height(), capped).unwrap();
            let shifted: Vec<u8> = base.data().iter().map(|&v| v + c).collect();
            let shifted = GrayPlane::new(plane.width(), plane.height(), shifted).unwrap();
            let params = OperatorParams::new(8, 1).unwrap();
            let a = significance_mask(&base, &params, LsvMode::Absolute).unwrap();
            let b = significance_mask(&shifted, &params, LsvMode::Absolute).unwrap();
            // Interpolated planes shift by c only up to reassociation of the
            // lerp additions, so allow float noise: gsv within tolerance and
            // point agreement away from the knife edge.
            prop_assert!((a.gsv - b.gsv).abs() < 1e-9);
            prop_assert_eq!(a.fallback, b.fallback);
            for iy in 0..a.height() {
                for ix in 0..a.width() {
                    let v = lsv(&base, ix + 1, iy + 1, &params, LsvMode::Absolute).unwrap();
                    if (v - a.gsv).abs() > 1e-6 {
                        prop_assert_eq!(a.selected(ix, iy), b.selected(ix, iy));
                    }
                }
            }
        }

        #[test]
        fn doubling_contrast_doubles_gsv_and_keeps_the_mask(plane in small_plane()) {
            let halved: Vec<u8> = plane.data().iter().map(|&v| v / 2).collect();
            let base = GrayPlane::new(plane.width(), plane.height(), halved).unwrap();
            let doubled: Vec<u8> = base.data().iter().map(|&v| v * 2).collect();
            let doubled = GrayPlane::new(plane.width(), plane.height(), doubled).unwrap();
            let params = OperatorParams::new(8, 1).unwrap();
            let a = significance_mask(&base, &params, LsvMode::Absolute).unwrap();
            let b = significance_mask(&doubled, &params, LsvMode::Absolute).unwrap();
            prop_assert_eq!(b.gsv, 2.0 * a.gsv);
            prop_assert_eq!(a.fallback, b.fallback);
            for iy in 0..a.height() {
                for ix in 0..a.width() {
                    prop_assert_eq!(a.selected(ix, iy), b.selected(ix, iy));
                }
            }
        }

        #[test]
        fn selection_rotates_with_the_image(plane in small_plane()) {
            let params = OperatorParams::new(8, 1).unwrap();
            let a = significance_mask(&plane, &params, LsvMode::Absolute).unwrap();
            let rot = plane.rotate90();
            let b = significance_mask(&rot, &params, LsvMode::Absolute).unwrap();
            prop_assert!((a.gsv - b.gsv).abs() < 1e-9);
            prop_assert_eq!(a.fallback, b.fallback);
            prop_assert_eq!(a.selected_count(), b.selected_count());
            // Point-by-point mapping, skipping pixels whose LSV sits within
            // float noise of the GSV (the strict compare may flip there).
            let ih = a.height();
            for iy in 0..b.height() {
                for ix in 0..b.width() {
                    let (sx, sy) = (iy, ih - 1 - ix);
                    let v = lsv(&plane, sx + 1, sy + 1, &params, LsvMode::Absolute).unwrap();
                    if (v - a.gsv).abs() > 1e-6 {
                        prop_assert_eq!(b.selected(ix, iy), a.selected(sx, sy));
                    }
                }
            }
        }
    }
}
