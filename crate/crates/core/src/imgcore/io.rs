//! PNG encode/decode for the pipeline's on-disk image conventions:
//!
//! * depth: 16-bit single-channel, values in millimeters, raw 0 means
//!   "no measurement" and becomes [`UNKNOWN_DEPTH`] in memory;
//! * RGB: 8-bit three-channel, normalized to `[0, 1]` by `/255`;
//! * alpha / scalar maps: 8-bit single-channel, normalized by `/255`,
//!   written back as `round(255 * v)`;
//! * trimaps: same encoding, so the levels map to `{0, 128, 255}`.
//!
//! Loads are strict: a file with the wrong bit depth or channel count is
//! rejected with an error naming the offending property, never converted.

use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat};

use super::{DepthMap, RgbImage, ScalarMap, Trimap, UNKNOWN_DEPTH};
use crate::error::{Error, Result};

fn describe_color(color: ColorType) -> String {
    let (bits, channels) = match color {
        ColorType::L8 => (8, 1),
        ColorType::La8 => (8, 2),
        ColorType::Rgb8 => (8, 3),
        ColorType::Rgba8 => (8, 4),
        ColorType::L16 => (16, 1),
        ColorType::La16 => (16, 2),
        ColorType::Rgb16 => (16, 3),
        ColorType::Rgba16 => (16, 4),
        ColorType::Rgb32F => (32, 3),
        ColorType::Rgba32F => (32, 4),
        other => return format!("{other:?}"),
    };
    format!("{bits}-bit {channels}-channel")
}

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| match source {
        image::ImageError::IoError(source) => Error::Read {
            path: path.to_path_buf(),
            source,
        },
        source => Error::Decode {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Loads a 16-bit single-channel PNG as a depth map in millimeters.
pub fn load_depth_png(path: &Path) -> Result<DepthMap> {
    let img = open(path)?;
    let buf = match img {
        DynamicImage::ImageLuma16(buf) => buf,
        other => {
            return Err(Error::PixelFormat {
                path: path.to_path_buf(),
                expected: "16-bit 1-channel (depth)",
                found: describe_color(other.color()),
            })
        }
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let data = buf
        .into_raw()
        .into_iter()
        .map(|raw| if raw == 0 { UNKNOWN_DEPTH } else { raw as f32 })
        .collect();
    DepthMap::new(w, h, data)
}

/// Writes a depth map as a 16-bit single-channel PNG. Unknown samples are
/// stored as raw 0; known samples are rounded to the nearest millimeter and
/// clamped to the 16-bit range.
pub fn save_depth_png(map: &DepthMap, path: &Path) -> Result<()> {
    let data: Vec<u16> = map
        .data()
        .iter()
        .map(|&v| {
            if v > 0.0 {
                (f64::from(v).round().clamp(1.0, 65535.0)) as u16
            } else {
                0
            }
        })
        .collect();
    let buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
        image::ImageBuffer::from_raw(map.width() as u32, map.height() as u32, data)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

/// Loads an 8-bit three-channel PNG, normalizing each channel by `/255`.
pub fn load_rgb_png(path: &Path) -> Result<RgbImage> {
    let img = open(path)?;
    let buf = match img {
        DynamicImage::ImageRgb8(buf) => buf,
        other => {
            return Err(Error::PixelFormat {
                path: path.to_path_buf(),
                expected: "8-bit 3-channel (rgb)",
                found: describe_color(other.color()),
            })
        }
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let data = buf.into_raw().into_iter().map(|c| c as f32 / 255.0).collect();
    Ok(RgbImage::from_validated(w, h, data))
}

/// Writes an RGB image as an 8-bit three-channel PNG via `round(255 * v)`.
pub fn save_rgb_png(img: &RgbImage, path: &Path) -> Result<()> {
    let data: Vec<u8> = img.data().iter().map(|&v| quantize_u8(v)).collect();
    let buf: image::ImageBuffer<image::Rgb<u8>, Vec<u8>> =
        image::ImageBuffer::from_raw(img.width() as u32, img.height() as u32, data)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

/// Loads an 8-bit single-channel PNG as a `[0, 1]` scalar map.
pub fn load_scalar_png(path: &Path) -> Result<ScalarMap> {
    let img = open(path)?;
    let buf = match img {
        DynamicImage::ImageLuma8(buf) => buf,
        other => {
            return Err(Error::PixelFormat {
                path: path.to_path_buf(),
                expected: "8-bit 1-channel (alpha)",
                found: describe_color(other.color()),
            })
        }
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let data = buf.into_raw().into_iter().map(|c| c as f32 / 255.0).collect();
    Ok(ScalarMap::from_validated(w, h, data))
}

/// Writes a scalar map as an 8-bit single-channel PNG via `round(255 * v)`.
pub fn save_scalar_png(map: &ScalarMap, path: &Path) -> Result<()> {
    save_gray8(map.width(), map.height(), map.data(), path)
}

/// Writes a trimap with the same quantization as scalar maps, so the three
/// levels land on exactly `{0, 128, 255}`.
pub fn save_trimap_png(map: &Trimap, path: &Path) -> Result<()> {
    save_gray8(map.width(), map.height(), map.data(), path)
}

fn quantize_u8(v: f32) -> u8 {
    (f64::from(v) * 255.0).round().clamp(0.0, 255.0) as u8
}

fn save_gray8(width: usize, height: usize, data: &[f32], path: &Path) -> Result<()> {
    let raw: Vec<u8> = data.iter().map(|&v| quantize_u8(v)).collect();
    let buf: image::ImageBuffer<image::Luma<u8>, Vec<u8>> =
        image::ImageBuffer::from_raw(width as u32, height as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("depthmatte-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn depth_round_trips_with_zero_as_unknown() {
        let map = DepthMap::new(3, 2, vec![1.0, 500.0, 65535.0, -1.0, 2.5, 3000.0]).unwrap();
        let path = tmp("depth_rt.png");
        save_depth_png(&map, &path).unwrap();
        let back = load_depth_png(&path).unwrap();
        assert_eq!(back.dims(), (3, 2));
        // 2.5 mm rounds half away from zero to 3 mm on disk; everything
        // else is integral and survives exactly.
        assert_eq!(
            back.data(),
            &[1.0, 500.0, 65535.0, UNKNOWN_DEPTH, 3.0, 3000.0]
        );
    }

    #[test]
    fn depth_load_rejects_8_bit_naming_the_format() {
        let path = tmp("gray8.png");
        let map = ScalarMap::new(2, 2, vec![0.0, 0.5, 0.25, 1.0]).unwrap();
        save_scalar_png(&map, &path).unwrap();
        let err = load_depth_png(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("16-bit 1-channel"), "missing expectation: {msg}");
        assert!(msg.contains("8-bit 1-channel"), "missing found format: {msg}");
    }

    #[test]
    fn rgb_load_rejects_gray_input() {
        let path = tmp("gray_for_rgb.png");
        let map = ScalarMap::new(2, 2, vec![0.0; 4]).unwrap();
        save_scalar_png(&map, &path).unwrap();
        assert!(matches!(
            load_rgb_png(&path),
            Err(Error::PixelFormat { .. })
        ));
    }

    #[test]
    fn scalar_quantization_rounds_half_up() {
        let map = ScalarMap::new(2, 1, vec![0.5, 1.0]).unwrap();
        let path = tmp("scalar_q.png");
        save_scalar_png(&map, &path).unwrap();
        let back = load_scalar_png(&path).unwrap();
        // 0.5 * 255 = 127.5 rounds away from zero to 128.
        assert_eq!(back.data(), &[128.0 / 255.0, 1.0]);
    }

    #[test]
    fn missing_file_reports_read_error_with_path() {
        let err = load_depth_png(Path::new("/nonexistent/depth.png")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/depth.png"));
    }

    #[test]
    fn trimap_levels_hit_exact_bytes() {
        let tri = Trimap::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let path = tmp("trimap.png");
        save_trimap_png(&tri, &path).unwrap();
        let back = load_scalar_png(&path).unwrap();
        let bytes: Vec<u8> = back.data().iter().map(|&v| (v * 255.0).round() as u8).collect();
        assert_eq!(bytes, vec![0, 128, 255]);
    }
}
