//! Planes, RGB rasters, and circular neighborhood sampling.
//!
//! Pixels are exact `u8` integers; values are promoted to `f64` only when a
//! ring sample lands off-lattice and needs bilinear interpolation. The ring
//! convention: neighbor `k` of `(x, y)` sits at
//! `(x + R*cos(2*pi*k/P), y - R*sin(2*pi*k/P))` — neighbor 0 due east,
//! counting counter-clockwise (y grows downward).
//!
//! Two numerical details matter enough to call out:
//!
//! - Ring offsets are precomputed per `(P, R)` and snapped to integers when
//!   within 1e-8. `cos`/`sin` at axis angles return ~1e-16 residue, which
//!   would otherwise leak interpolation error into samples that should be
//!   raw pixel reads.
//! - Bilinear interpolation is evaluated as a lerp in x then a lerp in y.
//!   That form returns the shared value *exactly* when the four corners are
//!   equal, so flat regions produce exact ties — which keeps sign-based codes
//!   stable under rotation and intensity shifts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcount::OpCounters;

/// One 8-bit plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayPlane {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayPlane {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != width as usize * height as usize {
            return Err(Error::BadPlaneLength { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { width, height, data: vec![value; width as usize * height as usize] })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    /// Clockwise quarter turn; a `W x H` plane becomes `H x W`.
    pub fn rotate90(&self) -> GrayPlane {
        let (w, h) = (self.width, self.height);
        let mut data = vec![0u8; self.data.len()];
        for y in 0..w {
            for x in 0..h {
                // dst(x, y) = src(y, H-1-x)
                data[y as usize * h as usize + x as usize] = self.get(y, h - 1 - x);
            }
        }
        GrayPlane { width: h, height: w, data }
    }

    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<GrayPlane> {
        if w == 0 || h == 0 {
            return Err(Error::ZeroDimension);
        }
        if x + w > self.width || y + h > self.height {
            return Err(Error::WindowTooLarge { w, h, width: self.width, height: self.height });
        }
        let mut data = Vec::with_capacity(w as usize * h as usize);
        for row in y..y + h {
            let start = row as usize * self.width as usize + x as usize;
            data.extend_from_slice(&self.data[start..start + w as usize]);
        }
        GrayPlane::new(w, h, data)
    }
}

/// Three equally sized planes in R, G, B order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    planes: [GrayPlane; 3],
}

impl RgbImage {
    pub fn new(planes: [GrayPlane; 3]) -> Result<Self> {
        let (w, h) = (planes[0].width, planes[0].height);
        if planes.iter().any(|p| p.width != w || p.height != h) {
            return Err(Error::PlaneMismatch);
        }
        Ok(Self { planes })
    }

    /// All three planes set to the same gray content.
    pub fn from_gray(plane: GrayPlane) -> Self {
        Self { planes: [plane.clone(), plane.clone(), plane] }
    }

    pub fn width(&self) -> u32 {
        self.planes[0].width
    }

    pub fn height(&self) -> u32 {
        self.planes[0].height
    }

    pub fn plane(&self, i: usize) -> &GrayPlane {
        &self.planes[i]
    }

    pub fn planes(&self) -> &[GrayPlane; 3] {
        &self.planes
    }

    pub fn planes_mut(&mut self) -> &mut [GrayPlane; 3] {
        &mut self.planes
    }

    pub fn rotate90(&self) -> RgbImage {
        RgbImage { planes: [0, 1, 2].map(|i| self.planes[i].rotate90()) }
    }

    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<RgbImage> {
        let planes =
            [self.planes[0].crop(x, y, w, h)?, self.planes[1].crop(x, y, w, h)?, self.planes[2].crop(x, y, w, h)?];
        RgbImage::new(planes)
    }

    /// Per-pixel mean of the three planes, rounded to the nearest integer.
    /// (A sum of three bytes over 3 never lands on .5, so no tie rule is
    /// needed.)
    pub fn mean_plane(&self) -> GrayPlane {
        let n = self.planes[0].data.len();
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let s = self.planes[0].data[i] as u32 + self.planes[1].data[i] as u32 + self.planes[2].data[i] as u32;
            data.push((s as f64 / 3.0).round() as u8);
        }
        GrayPlane { width: self.width(), height: self.height(), data }
    }
}

/// Free-function form of [`RgbImage::mean_plane`].
pub fn mean_plane(image: &RgbImage) -> GrayPlane {
    image.mean_plane()
}

/// Ring geometry and labeling threshold shared by every operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorParams {
    /// Neighbors on the ring (4..=32).
    pub p: u32,
    /// Ring radius in pixels (>= 1); also the interior border margin.
    pub r: u32,
    /// Uniformity threshold; patterns with more circular transitions than
    /// this collapse into the miscellaneous label `P + 1`. Defaults to `P/4`.
    pub u_t: u32,
}

impl OperatorParams {
    pub fn new(p: u32, r: u32) -> Result<Self> {
        Self::with_threshold(p, r, p / 4)
    }

    pub fn with_threshold(p: u32, r: u32, u_t: u32) -> Result<Self> {
        if !(4..=32).contains(&p) {
            return Err(Error::BadParams(format!("neighbor count {p} outside 4..=32")));
        }
        if r == 0 {
            return Err(Error::BadParams("radius must be at least 1".into()));
        }
        if u_t > p {
            return Err(Error::BadParams(format!("uniformity threshold {u_t} exceeds {p}")));
        }
        Ok(Self { p, r, u_t })
    }

    /// Interior dimensions for a plane of the given size, or an error when
    /// no interior pixel is at least `R` from every border.
    pub fn interior(&self, width: u32, height: u32) -> Result<(u32, u32)> {
        let margin = 2 * self.r;
        if width <= margin || height <= margin {
            return Err(Error::ImageTooSmall { width, height, r: self.r, min: margin });
        }
        Ok((width - margin, height - margin))
    }
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self { p: 8, r: 1, u_t: 2 }
    }
}

/// Center value and the `P` ring values around it, promoted to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSample {
    pub center: f64,
    pub neighbors: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum RingOffset {
    /// Sample lands on the lattice; read the pixel directly.
    Lattice { dx: i32, dy: i32 },
    /// Off-lattice: base corner offset plus fractional position inside the
    /// unit cell.
    Fractional { bx: i32, by: i32, fx: f64, fy: f64 },
}

/// Precomputed ring offsets for one `(P, R)`; reused across every pixel.
#[derive(Debug, Clone)]
pub(crate) struct Sampler {
    offsets: Vec<RingOffset>,
}

const SNAP_EPS: f64 = 1e-8;

impl Sampler {
    pub(crate) fn new(params: &OperatorParams) -> Sampler {
        let p = params.p;
        let offsets = (0..p)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / p as f64;
                let mut ox = params.r as f64 * angle.cos();
                let mut oy = -(params.r as f64 * angle.sin());
                if (ox - ox.round()).abs() < SNAP_EPS {
                    ox = ox.round();
                }
                if (oy - oy.round()).abs() < SNAP_EPS {
                    oy = oy.round();
                }
                if ox.fract() == 0.0 && oy.fract() == 0.0 {
                    RingOffset::Lattice { dx: ox as i32, dy: oy as i32 }
                } else {
                    let bx = ox.floor();
                    let by = oy.floor();
                    RingOffset::Fractional {
                        bx: bx as i32,
                        by: by as i32,
                        fx: ox - bx,
                        fy: oy - by,
                    }
                }
            })
            .collect();
        Sampler { offsets }
    }

    /// Sample the ring around an interior pixel into `out` (cleared first).
    /// Interpolation arithmetic is tallied into `ops`.
    pub(crate) fn sample_into(&self, plane: &GrayPlane, x: u32, y: u32, out: &mut Vec<f64>, ops: &mut OpCounters) {
        out.clear();
        for off in &self.offsets {
            let v = match *off {
                RingOffset::Lattice { dx, dy } => {
                    plane.get((x as i64 + dx as i64) as u32, (y as i64 + dy as i64) as u32) as f64
                }
                RingOffset::Fractional { bx, by, fx, fy } => {
                    let x0 = (x as i64 + bx as i64) as u32;
                    let y0 = (y as i64 + by as i64) as u32;
                    let p00 = plane.get(x0, y0) as f64;
                    let p10 = plane.get(x0 + 1, y0) as f64;
                    let p01 = plane.get(x0, y0 + 1) as f64;
                    let p11 = plane.get(x0 + 1, y0 + 1) as f64;
                    // Lerp in x, then y: exact for equal corners.
                    let top = p00 + fx * (p10 - p00);
                    let bot = p01 + fx * (p11 - p01);
                    ops.subtractions += 3;
                    ops.multiplications += 3;
                    ops.additions += 3;
                    top + fy * (bot - top)
                }
            };
            out.push(v);
        }
    }
}

/// Ring sample around one interior pixel.
///
/// # Examples
///
/// ```
/// use hclbp::raster::{sample_neighborhood, GrayPlane, OperatorParams};
///
/// let plane = GrayPlane::filled(5, 5, 7).unwrap();
/// let params = OperatorParams::new(8, 1).unwrap();
/// let s = sample_neighborhood(&plane, 2, 2, &params).unwrap();
/// assert_eq!(s.center, 7.0);
/// assert!(s.neighbors.iter().all(|&v| v == 7.0));
/// ```
pub fn sample_neighborhood(
    plane: &GrayPlane,
    x: u32,
    y: u32,
    params: &OperatorParams,
) -> Result<NeighborhoodSample> {
    params.interior(plane.width(), plane.height())?;
    let r = params.r;
    if x < r || y < r || x >= plane.width() - r || y >= plane.height() - r {
        return Err(Error::OutsideInterior { x, y, r });
    }
    let sampler = Sampler::new(params);
    let mut neighbors = Vec::with_capacity(params.p as usize);
    let mut scratch = OpCounters::default();
    sampler.sample_into(plane, x, y, &mut neighbors, &mut scratch);
    Ok(NeighborhoodSample { center: plane.get(x, y) as f64, neighbors })
}

/// Number of non-overlapping `w x h` windows that tile an image from the
/// top-left: `(columns, rows)`. Remainder pixels on the right/bottom edges
/// are discarded.
pub fn window_grid(width: u32, height: u32, w: u32, h: u32) -> Result<(u32, u32)> {
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension);
    }
    if w > width || h > height {
        return Err(Error::WindowTooLarge { w, h, width, height });
    }
    Ok((width / w, height / h))
}

/// Tile an image into `w x h` windows, row-major from the top-left.
///
/// # Examples
///
/// ```
/// use hclbp::raster::{crop_windows, GrayPlane, RgbImage};
///
/// let plane = GrayPlane::filled(512, 512, 0).unwrap();
/// let image = RgbImage::from_gray(plane);
/// assert_eq!(crop_windows(&image, 128, 128).unwrap().len(), 16);
/// ```
pub fn crop_windows(image: &RgbImage, w: u32, h: u32) -> Result<Vec<RgbImage>> {
    let (cols, rows) = window_grid(image.width(), image.height(), w, h)?;
    let mut out = Vec::with_capacity(cols as usize * rows as usize);
    for row in 0..rows {
        for col in 0..cols {
            out.push(image.crop(col * w, row * h, w, h)?);
        }
    }
    Ok(out)
}
