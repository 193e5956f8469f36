//! Fusing the depth route's error estimate with the RGB predictor's own.
//!
//! The depth route's error map is the absolute residual between the depth
//! posterior and the raw matte; the fused map is a convex combination
//! weighted by `beta`, which keeps the endpoints exact: `beta = 0` returns
//! the RGB error map bit for bit, `beta = 1` the depth residual.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgcore::ScalarMap;

/// Per-pixel absolute difference `|a_depth - a_raw|`.
pub fn residual_map(a_depth: &ScalarMap, a_raw: &ScalarMap) -> Result<ScalarMap> {
    if a_depth.dims() != a_raw.dims() {
        return Err(Error::dims("residual map", a_depth.dims(), a_raw.dims()));
    }
    let (w, h) = a_depth.dims();
    let a = a_depth.data();
    let b = a_raw.data();
    let mut data = vec![0.0f32; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let base = y * w;
        for (x, out) in row.iter_mut().enumerate() {
            let i = base + x;
            *out = (f64::from(a[i]) - f64::from(b[i])).abs() as f32;
        }
    });
    Ok(ScalarMap::from_validated(w, h, data))
}

/// Convex combination `beta * e_depth + (1 - beta) * e_rgb`.
pub fn fuse_error_maps(e_depth: &ScalarMap, e_rgb: &ScalarMap, beta: f64) -> Result<ScalarMap> {
    if !(beta.is_finite() && (0.0..=1.0).contains(&beta)) {
        return Err(Error::param("beta", format!("{beta} must lie in [0, 1]")));
    }
    if e_depth.dims() != e_rgb.dims() {
        return Err(Error::dims("error fusion", e_depth.dims(), e_rgb.dims()));
    }
    let (w, h) = e_depth.dims();
    let a = e_depth.data();
    let b = e_rgb.data();
    let inv = 1.0 - beta;
    let mut data = vec![0.0f32; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let base = y * w;
        for (x, out) in row.iter_mut().enumerate() {
            let i = base + x;
            let v = beta * f64::from(a[i]) + inv * f64::from(b[i]);
            *out = v.clamp(0.0, 1.0) as f32;
        }
    });
    Ok(ScalarMap::from_validated(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_is_symmetric_and_absolute() {
        let a = ScalarMap::new(2, 1, vec![0.8, 0.1]).unwrap();
        let b = ScalarMap::new(2, 1, vec![0.5, 0.4]).unwrap();
        let ab = residual_map(&a, &b).unwrap();
        let ba = residual_map(&b, &a).unwrap();
        assert_eq!(ab.data(), ba.data());
        assert!((f64::from(ab.get(0, 0)) - 0.3).abs() < 1e-7);
    }

    #[test]
    fn residual_of_identical_maps_is_zero() {
        let a = ScalarMap::new(3, 1, vec![0.8, 0.1, 0.33]).unwrap();
        let r = residual_map(&a, &a).unwrap();
        assert!(r.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fusion_endpoints_are_bit_exact() {
        let a = ScalarMap::new(3, 1, vec![0.123, 0.5, 0.99]).unwrap();
        let b = ScalarMap::new(3, 1, vec![0.9, 0.0, 0.01]).unwrap();
        let only_rgb = fuse_error_maps(&a, &b, 0.0).unwrap();
        assert_eq!(only_rgb.data(), b.data());
        let only_depth = fuse_error_maps(&a, &b, 1.0).unwrap();
        assert_eq!(only_depth.data(), a.data());
    }

    #[test]
    fn fusion_spot_value_at_default_weight() {
        let a = ScalarMap::new(1, 1, vec![0.5]).unwrap();
        let b = ScalarMap::new(1, 1, vec![0.1]).unwrap();
        let f = fuse_error_maps(&a, &b, 0.05).unwrap();
        // 0.05 * 0.5 + 0.95 * 0.1 = 0.12, up to f32 input representation.
        assert!((f64::from(f.get(0, 0)) - 0.12).abs() < 1e-7);
    }

    #[test]
    fn fusion_rejects_out_of_range_beta() {
        let a = ScalarMap::new(1, 1, vec![0.5]).unwrap();
        assert!(fuse_error_maps(&a, &a, -0.1).is_err());
        assert!(fuse_error_maps(&a, &a, 1.1).is_err());
        assert!(fuse_error_maps(&a, &a, f64::NAN).is_err());
    }

    #[test]
    fn mismatched_dims_are_rejected() {
        let a = ScalarMap::new(2, 1, vec![0.5, 0.5]).unwrap();
        let b = ScalarMap::new(1, 2, vec![0.5, 0.5]).unwrap();
        assert!(residual_map(&a, &b).is_err());
        assert!(fuse_error_maps(&a, &b, 0.5).is_err());
    }
}
