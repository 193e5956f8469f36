//! Per-pixel Gaussian background depth statistics.
//!
//! The model is estimated from a stack of pure-background depth maps, using
//! only the valid (positive) observations at each pixel:
//!
//! * some valid observations: mean of them; two or more: sample (n-1)
//!   standard deviation;
//! * exactly one: std falls back to `psi * mean`;
//! * none: the pixel is treated as at the sensor limit, mean `d_max` and
//!   std `psi * d_max`.
//!
//! A final floor `std >= psi * mean` keeps identical observations from
//! producing a degenerate zero-width distribution.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imgcore::DepthMap;

const MODEL_MAGIC: [u8; 4] = *b"DBGM";
const MODEL_VERSION: u32 = 1;

/// Per-pixel background depth distribution at working (quarter) resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundDepthModel {
    width: usize,
    height: usize,
    mean: Vec<f32>,
    std: Vec<f32>,
    psi: f64,
    d_max: f64,
}

impl BackgroundDepthModel {
    pub fn new(
        width: usize,
        height: usize,
        mean: Vec<f32>,
        std: Vec<f32>,
        psi: f64,
        d_max: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidData(format!(
                "zero-sized model {width}x{height}"
            )));
        }
        if mean.len() != width * height || std.len() != width * height {
            return Err(Error::InvalidData(format!(
                "model buffers ({} means, {} stds) do not match {width}x{height}",
                mean.len(),
                std.len()
            )));
        }
        validate_scale_params(psi, d_max)?;
        for (&m, &s) in mean.iter().zip(&std) {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidData(format!("model mean {m} must be > 0")));
            }
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidData(format!("model std {s} must be > 0")));
            }
        }
        Ok(Self {
            width,
            height,
            mean,
            std,
            psi,
            d_max,
        })
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

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    pub fn std(&self) -> &[f32] {
        &self.std
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    #[inline]
    pub fn mean_at(&self, x: usize, y: usize) -> f32 {
        self.mean[y * self.width + x]
    }

    #[inline]
    pub fn std_at(&self, x: usize, y: usize) -> f32 {
        self.std[y * self.width + x]
    }
}

fn validate_scale_params(psi: f64, d_max: f64) -> Result<()> {
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::param("psi", format!("{psi} must be > 0")));
    }
    if !(d_max.is_finite() && d_max > 0.0) {
        return Err(Error::param("d_max", format!("{d_max} must be > 0")));
    }
    Ok(())
}

/// Estimates the per-pixel background distribution from a stack of depth
/// maps sharing one resolution. Statistics are accumulated in `f64` and
/// stored as `f32`; the observation order never changes the result beyond
/// `f64` rounding, and the output is independent of thread count.
pub fn build_background_model(
    maps: &[DepthMap],
    psi: f64,
    d_max: f64,
) -> Result<BackgroundDepthModel> {
    validate_scale_params(psi, d_max)?;
    let first = maps
        .first()
        .ok_or_else(|| Error::param("background maps", "at least one map is required"))?;
    let (w, h) = first.dims();
    for map in maps {
        if map.dims() != (w, h) {
            return Err(Error::dims("background model input", (w, h), map.dims()));
        }
    }

    let n = w * h;
    let mut count = vec![0u32; n];
    let mut sum = vec![0.0f64; n];
    for map in maps {
        for (i, &v) in map.data().iter().enumerate() {
            if v > 0.0 {
                count[i] += 1;
                sum[i] += f64::from(v);
            }
        }
    }

    let mean_f64: Vec<f64> = (0..n)
        .map(|i| {
            if count[i] > 0 {
                sum[i] / f64::from(count[i])
            } else {
                d_max
            }
        })
        .collect();

    let mut sq_dev = vec![0.0f64; n];
    for map in maps {
        for (i, &v) in map.data().iter().enumerate() {
            if v > 0.0 {
                let d = f64::from(v) - mean_f64[i];
                sq_dev[i] += d * d;
            }
        }
    }

    let mut mean = vec![0.0f32; n];
    let mut std = vec![0.0f32; n];
    for i in 0..n {
        let m = mean_f64[i];
        let s = match count[i] {
            0 => psi * d_max,
            1 => psi * m,
            c => (sq_dev[i] / f64::from(c - 1)).sqrt(),
        };
        mean[i] = m as f32;
        std[i] = s.max(psi * m) as f32;
    }
    BackgroundDepthModel::new(w, h, mean, std, psi, d_max)
}

/// Writes the model in its little-endian binary format: magic `DBGM`,
/// version, dimensions, `psi`, `d_max`, then the mean and std planes
/// row-major as `f32`. The round trip is bit-exact.
pub fn save_model(model: &BackgroundDepthModel, path: &Path) -> Result<()> {
    let n = model.width * model.height;
    let mut bytes = Vec::with_capacity(4 + 4 + 4 + 4 + 8 + 8 + 8 * n);
    bytes.extend_from_slice(&MODEL_MAGIC);
    bytes.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(model.width as u32).to_le_bytes());
    bytes.extend_from_slice(&(model.height as u32).to_le_bytes());
    bytes.extend_from_slice(&model.psi.to_le_bytes());
    bytes.extend_from_slice(&model.d_max.to_le_bytes());
    for &m in &model.mean {
        bytes.extend_from_slice(&m.to_le_bytes());
    }
    for &s in &model.std {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a model written by [`save_model`], rejecting bad magic, unsupported
/// versions, truncated or oversized payloads, and non-finite statistics.
pub fn load_model(path: &Path) -> Result<BackgroundDepthModel> {
    let bytes = std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let fail = |reason: String| Error::ModelFormat {
        path: path.to_path_buf(),
        reason,
    };

    if bytes.len() < 32 {
        return Err(fail(format!("truncated header ({} bytes)", bytes.len())));
    }
    if bytes[0..4] != MODEL_MAGIC {
        return Err(fail(format!("bad magic {:?}", &bytes[0..4])));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(fail(format!(
            "unsupported version {version} (expected {MODEL_VERSION})"
        )));
    }
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let psi = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let d_max = f64::from_le_bytes(bytes[24..32].try_into().unwrap());

    let n = width
        .checked_mul(height)
        .ok_or_else(|| fail(format!("dimensions {width}x{height} overflow")))?;
    let expected = 32 + 8 * n;
    if bytes.len() != expected {
        return Err(fail(format!(
            "payload is {} bytes, expected {expected} for {width}x{height}",
            bytes.len()
        )));
    }

    let read_plane = |offset: usize| -> Vec<f32> {
        bytes[offset..offset + 4 * n]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    };
    let mean = read_plane(32);
    let std = read_plane(32 + 4 * n);
    BackgroundDepthModel::new(width, height, mean, std, psi, d_max)
        .map_err(|e| fail(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PSI: f64 = 0.01;
    const D_MAX: f64 = 5460.0;

    fn map1(values: Vec<f32>) -> DepthMap {
        DepthMap::new(1, 1, values).unwrap()
    }

    #[test]
    fn three_valid_observations_give_sample_stats() {
        let maps = [map1(vec![990.0]), map1(vec![1000.0]), map1(vec![1010.0])];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        assert_eq!(model.mean(), &[1000.0]);
        assert_eq!(model.std(), &[10.0]);
    }

    #[test]
    fn single_observation_uses_psi_fallback() {
        let maps = [map1(vec![2500.0]), map1(vec![-1.0])];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        assert_eq!(model.mean(), &[2500.0]);
        assert_eq!(model.std(), &[25.0]);
    }

    #[test]
    fn no_observations_fall_back_to_sensor_limit() {
        let maps = [map1(vec![-1.0]), map1(vec![-1.0])];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        assert_eq!(model.mean(), &[5460.0]);
        assert_eq!(model.std(), &[54.6]);
    }

    #[test]
    fn identical_observations_hit_the_std_floor() {
        let maps = [map1(vec![1200.0]), map1(vec![1200.0]), map1(vec![1200.0])];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        assert_eq!(model.mean(), &[1200.0]);
        assert_eq!(model.std(), &[12.0]);
    }

    #[test]
    fn unknown_samples_are_excluded_from_statistics() {
        let maps = [
            map1(vec![990.0]),
            map1(vec![-1.0]),
            map1(vec![1000.0]),
            map1(vec![1010.0]),
        ];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        assert_eq!(model.mean(), &[1000.0]);
        assert_eq!(model.std(), &[10.0]);
    }

    #[test]
    fn mixed_pixels_are_independent() {
        let a = DepthMap::new(2, 1, vec![1000.0, -1.0]).unwrap();
        let b = DepthMap::new(2, 1, vec![1000.0, -1.0]).unwrap();
        let model = build_background_model(&[a, b], PSI, D_MAX).unwrap();
        assert_eq!(model.mean(), &[1000.0, 5460.0]);
        assert_eq!(model.std(), &[10.0, 54.6]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = DepthMap::new(2, 1, vec![1000.0, 1000.0]).unwrap();
        let b = DepthMap::new(1, 2, vec![1000.0, 1000.0]).unwrap();
        assert!(matches!(
            build_background_model(&[a, b], PSI, D_MAX),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn model_round_trips_bit_exactly() {
        let maps = [
            DepthMap::new(3, 2, vec![990.0, -1.0, 700.0, 1010.0, 333.3, -1.0]).unwrap(),
            DepthMap::new(3, 2, vec![1010.0, -1.0, 700.5, 990.0, 333.4, 5000.0]).unwrap(),
        ];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.dbgm");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn load_rejects_bad_magic_version_and_truncation() {
        let maps = [map1(vec![1000.0])];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.dbgm");
        save_model(&model, &path).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        std::fs::write(&path, &bad_magic).unwrap();
        assert!(load_model(&path).unwrap_err().to_string().contains("magic"));

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        std::fs::write(&path, &bad_version).unwrap();
        assert!(load_model(&path)
            .unwrap_err()
            .to_string()
            .contains("version"));

        std::fs::write(&path, &good[..good.len() - 1]).unwrap();
        let msg = load_model(&path).unwrap_err().to_string();
        assert!(msg.contains("bytes"), "unexpected: {msg}");
    }

    #[test]
    fn load_rejects_non_finite_values() {
        let maps = [map1(vec![1000.0])];
        let model = build_background_model(&maps, PSI, D_MAX).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.dbgm");
        save_model(&model, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[32..36].copy_from_slice(&f32::NAN.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_model(&path).is_err());
    }
}
