//! Pixel buffer types shared by the whole pipeline, plus their PNG I/O and
//! the resampling / filtering kernels.
//!
//! All buffers are row-major with `(x, y)` addressing, `f32` samples, and
//! validated invariants:
//!
//! * [`DepthMap`]: millimeters; every sample is either strictly positive or
//!   the unknown sentinel `-1.0`.
//! * [`ScalarMap`]: values in `[0, 1]` (alpha mattes, error maps, posteriors).
//! * [`RgbImage`]: interleaved RGB, each channel in `[0, 1]`.
//! * [`Trimap`]: values drawn from `{0.0, 0.5, 1.0}`.

mod io;
mod kernels;

pub use io::{
    load_depth_png, load_rgb_png, load_scalar_png, save_depth_png, save_rgb_png, save_scalar_png,
    save_trimap_png,
};
pub use kernels::{
    gaussian_blur, gaussian_kernel, nearest_src_index, remove_small_regions, resize_nearest,
    upsample_bilinear,
};

use crate::error::{Error, Result};

/// Depth sample marking a pixel where the sensor returned no measurement.
pub const UNKNOWN_DEPTH: f32 = -1.0;

/// Quarter-resolution dimensions for a full-resolution frame: the grid a
/// stride-4 predictor covers, i.e. `ceil(dim / 4)` per axis.
pub fn quarter_dims(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(4), height.div_ceil(4))
}

fn check_dims(width: usize, height: usize, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidData(format!(
            "zero-sized image {width}x{height}"
        )));
    }
    let expect = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels));
    if expect != Some(len) {
        return Err(Error::InvalidData(format!(
            "buffer of {len} samples does not match {width}x{height} with {channels} channel(s)"
        )));
    }
    Ok(())
}

/// Single-channel depth image in millimeters. Samples are strictly positive
/// or [`UNKNOWN_DEPTH`].
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        for &v in &data {
            if !(v == UNKNOWN_DEPTH || (v.is_finite() && v > 0.0)) {
                return Err(Error::InvalidData(format!(
                    "depth sample {v} is neither positive nor the unknown sentinel"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constructor for buffers whose validity the producing kernel already
    /// guarantees; validated in debug builds only.
    pub(crate) fn from_validated(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert!(Self::new(width, height, data.clone()).is_ok());
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// True where the sensor produced a measurement.
    #[inline]
    pub fn is_known(&self, x: usize, y: usize) -> bool {
        self.get(x, y) > 0.0
    }
}

/// Single-channel map with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        for &v in &data {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidData(format!(
                    "scalar sample {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub(crate) fn from_validated(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert!(Self::new(width, height, data.clone()).is_ok());
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }
}

/// Interleaved RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        for &v in &data {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidData(format!(
                    "rgb sample {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_validated(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert!(Self::new(width, height, data.clone()).is_ok());
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// The three channels of pixel `(x, y)`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Three-level segmentation: 0 background, 0.5 unknown, 1 foreground.
#[derive(Debug, Clone, PartialEq)]
pub struct Trimap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Trimap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        for &v in &data {
            if !(v == 0.0 || v == 0.5 || v == 1.0) {
                return Err(Error::InvalidData(format!(
                    "trimap sample {v} not one of 0, 0.5, 1"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_validated(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert!(Self::new(width, height, data.clone()).is_ok());
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_dims_rounds_up() {
        assert_eq!(quarter_dims(1920, 1080), (480, 270));
        assert_eq!(quarter_dims(640, 480), (160, 120));
        assert_eq!(quarter_dims(5, 2), (2, 1));
        assert_eq!(quarter_dims(1, 1), (1, 1));
    }

    #[test]
    fn depth_map_rejects_zero_and_negative_samples() {
        assert!(DepthMap::new(2, 1, vec![1.0, -1.0]).is_ok());
        assert!(DepthMap::new(2, 1, vec![0.0, 1.0]).is_err());
        assert!(DepthMap::new(2, 1, vec![-2.0, 1.0]).is_err());
        assert!(DepthMap::new(2, 1, vec![f32::NAN, 1.0]).is_err());
    }

    #[test]
    fn scalar_map_rejects_out_of_range() {
        assert!(ScalarMap::new(2, 1, vec![0.0, 1.0]).is_ok());
        assert!(ScalarMap::new(2, 1, vec![1.1, 0.0]).is_err());
        assert!(ScalarMap::new(2, 1, vec![-0.1, 0.0]).is_err());
    }

    #[test]
    fn trimap_rejects_values_outside_alphabet() {
        assert!(Trimap::new(3, 1, vec![0.0, 0.5, 1.0]).is_ok());
        assert!(Trimap::new(3, 1, vec![0.0, 0.4, 1.0]).is_err());
    }

    #[test]
    fn buffer_length_must_match_dims() {
        assert!(ScalarMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(RgbImage::new(2, 1, vec![0.0; 6]).is_ok());
        assert!(RgbImage::new(2, 1, vec![0.0; 2]).is_err());
        assert!(ScalarMap::new(0, 2, vec![]).is_err());
    }
}
