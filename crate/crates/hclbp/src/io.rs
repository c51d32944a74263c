//! Image file I/O: reads PNG and binary PPM (P6, maxval 255), writes PNG and
//! binary PGM (P5). Grayscale sources are replicated into all three planes.
//!
//! The PPM/PGM codecs are written out by hand because the contract is narrow
//! and exact: P6 with maxval 255 only, `#` comments allowed in the header,
//! anything else is an unsupported-format error rather than a silent
//! conversion. PNG goes through the `image` crate, restricted to 8-bit
//! variants.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{GrayPlane, RgbImage};

const PNG_MAGIC: [u8; 4] = [0x89, b'P', b'N', b'G'];

/// Load a PNG or binary PPM image. Format is detected from magic bytes, not
/// the extension.
pub fn load_image(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    if bytes.len() >= 4 && bytes[..4] == PNG_MAGIC {
        decode_png(path, &bytes)
    } else if bytes.len() >= 2 && &bytes[..2] == b"P6" {
        decode_ppm(path, &bytes)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: "not a PNG or binary PPM signature".into(),
        })
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<RgbImage> {
    use image::DynamicImage::*;
    let dynamic = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::UnsupportedFormat { path: path.to_owned(), reason: e.to_string() })?;
    match dynamic {
        ImageLuma8(_) | ImageLumaA8(_) | ImageRgb8(_) | ImageRgba8(_) => {}
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                reason: "only 8-bit PNG is supported".into(),
            })
        }
    }
    let rgb = dynamic.to_rgb8();
    let (width, height) = (rgb.width(), rgb.height());
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    planes_from_interleaved(width, height, rgb.as_raw())
}

fn decode_ppm(path: &Path, bytes: &[u8]) -> Result<RgbImage> {
    let bad = |reason: &str| Error::UnsupportedFormat { path: path.to_owned(), reason: reason.into() };

    let mut pos = 2; // past "P6"
    let mut fields = [0u32; 3];
    for field in &mut fields {
        *field = read_header_int(bytes, &mut pos).ok_or_else(|| bad("corrupt header"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("corrupt header"));
    }
    pos += 1;
    let n = width as usize * height as usize * 3;
    let raster = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated raster"))?;
    planes_from_interleaved(width, height, raster)
}

/// Parse one whitespace/comment-delimited decimal from a PNM header.
fn read_header_int(bytes: &[u8], pos: &mut usize) -> Option<u32> {
    // Skip whitespace and `#` comments (which run to end of line).
    loop {
        match bytes.get(*pos)? {
            b if b.is_ascii_whitespace() => *pos += 1,
            b'#' => {
                while *bytes.get(*pos)? != b'\n' {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if *pos == start {
        return None;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok()?.parse().ok()
}

fn planes_from_interleaved(width: u32, height: u32, raster: &[u8]) -> Result<RgbImage> {
    let n = width as usize * height as usize;
    let mut planes = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for px in raster.chunks_exact(3) {
        planes[0].push(px[0]);
        planes[1].push(px[1]);
        planes[2].push(px[2]);
    }
    let [r, g, b] = planes;
    RgbImage::new([
        GrayPlane::new(width, height, r)?,
        GrayPlane::new(width, height, g)?,
        GrayPlane::new(width, height, b)?,
    ])
}

/// Write an image as 8-bit RGB PNG.
pub fn write_png(path: &Path, image: &RgbImage) -> Result<()> {
    let (w, h) = (image.width(), image.height());
    let mut interleaved = Vec::with_capacity(w as usize * h as usize * 3);
    for i in 0..w as usize * h as usize {
        interleaved.push(image.plane(0).data()[i]);
        interleaved.push(image.plane(1).data()[i]);
        interleaved.push(image.plane(2).data()[i]);
    }
    image::save_buffer_with_format(
        path,
        &interleaved,
        w,
        h,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .map_err(|e| match e {
        image::ImageError::IoError(source) => Error::Io { path: path.to_owned(), source },
        other => Error::UnsupportedFormat { path: path.to_owned(), reason: other.to_string() },
    })
}

/// Write a plane as binary PGM (P5, maxval 255).
pub fn write_pgm(path: &Path, plane: &GrayPlane) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", plane.width(), plane.height()).into_bytes();
    out.extend_from_slice(plane.data());
    fs::write(path, out).map_err(|source| Error::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn ppm_p6_round_trips_exact_planes() {
        let dir = tmp();
        let path = dir.path().join("two.ppm");
        // 2x2: distinct channel values per pixel.
        let mut bytes = b"P6\n# a comment\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[
            1, 2, 3, 4, 5, 6, //
            7, 8, 9, 10, 11, 12,
        ]);
        fs::write(&path, bytes).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.plane(0).data(), &[1, 4, 7, 10]);
        assert_eq!(img.plane(1).data(), &[2, 5, 8, 11]);
        assert_eq!(img.plane(2).data(), &[3, 6, 9, 12]);
    }

    #[test]
    fn ppm_rejections() {
        let dir = tmp();
        let path = dir.path().join("bad.ppm");

        fs::write(&path, b"P6\nnot numbers\n").unwrap();
        assert!(matches!(load_image(&path), Err(Error::UnsupportedFormat { .. })));

        fs::write(&path, b"P6\n2 2\n65535\n\x00").unwrap();
        assert!(matches!(load_image(&path), Err(Error::UnsupportedFormat { .. })));

        fs::write(&path, b"P6\n0 2\n255\n").unwrap();
        assert!(matches!(load_image(&path), Err(Error::ZeroDimension)));

        fs::write(&path, b"P6\n2 2\n255\n\x01\x02").unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");

        fs::write(&path, b"P3\n2 2\n255\n").unwrap();
        assert!(matches!(load_image(&path), Err(Error::UnsupportedFormat { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tmp();
        assert!(matches!(load_image(&dir.path().join("absent.png")), Err(Error::Io { .. })));
    }

    #[test]
    fn png_round_trip_and_gray_replication() {
        let dir = tmp();

        let r = GrayPlane::new(2, 1, vec![10, 20]).unwrap();
        let g = GrayPlane::new(2, 1, vec![30, 40]).unwrap();
        let b = GrayPlane::new(2, 1, vec![50, 60]).unwrap();
        let img = RgbImage::new([r, g, b]).unwrap();
        let path = dir.path().join("rt.png");
        write_png(&path, &img).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);

        // Grayscale PNG: one plane replicated three times.
        let gray = image::GrayImage::from_raw(1, 1, vec![128]).unwrap();
        let gpath = dir.path().join("gray.png");
        gray.save_with_format(&gpath, image::ImageFormat::Png).unwrap();
        let img = load_image(&gpath).unwrap();
        for i in 0..3 {
            assert_eq!(img.plane(i).data(), &[128]);
        }
    }

    #[test]
    fn sixteen_bit_png_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("deep.png");
        let deep = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(1, 1, vec![40_000]).unwrap();
        deep.save_with_format(&path, image::ImageFormat::Png).unwrap();
        assert!(matches!(load_image(&path), Err(Error::UnsupportedFormat { .. })));
    }

    #[test]
    fn pgm_writer_emits_p5() {
        let dir = tmp();
        let path = dir.path().join("mask.pgm");
        let plane = GrayPlane::new(3, 1, vec![0, 255, 0]).unwrap();
        write_pgm(&path, &plane).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"P5\n3 1\n255\n\x00\xff\x00");
    }
}
