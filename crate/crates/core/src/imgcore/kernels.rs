//! Resampling and filtering kernels.
//!
//! Conventions, fixed so results are reproducible bit for bit:
//!
//! * Sample positions use pixel centers: output pixel `o` maps to input
//!   coordinate `(o + 0.5) * in/out - 0.5`.
//! * Nearest-neighbor rounding breaks ties toward the lower index, computed
//!   in integer arithmetic (no float rounding involved).
//! * Bilinear sampling clamps taps at the borders (align-corners-false).
//! * Gaussian kernels have radius `ceil(3 * sigma)`, are normalized to sum 1,
//!   and convolutions use replicate padding.
//! * Accumulation happens in `f64` in a fixed per-pixel order, so results do
//!   not depend on the number of worker threads.

use rayon::prelude::*;

use super::{DepthMap, ScalarMap};
use crate::error::{Error, Result};

/// Source index sampled by nearest-neighbor resampling for output index
/// `dst` when mapping `dst_len` output pixels onto `src_len` input pixels.
/// Pixel-center mapping; ties round toward the lower index.
pub fn nearest_src_index(dst: usize, dst_len: usize, src_len: usize) -> usize {
    debug_assert!(dst < dst_len && dst_len > 0 && src_len > 0);
    // index = ceil(src - 0.5) with src = (dst + 0.5) * src_len/dst_len - 0.5,
    // i.e. ceil(((2*dst + 1) * src_len - 2*dst_len) / (2*dst_len)).
    let num = (2 * dst as i64 + 1) * src_len as i64 - 2 * dst_len as i64;
    let den = 2 * dst_len as i64;
    let idx = num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0);
    idx.clamp(0, src_len as i64 - 1) as usize
}

/// Nearest-neighbor resampling of a depth map. Never interpolates, so the
/// unknown sentinel propagates unchanged and no new values appear.
pub fn resize_nearest(map: &DepthMap, out_width: usize, out_height: usize) -> Result<DepthMap> {
    if out_width == 0 || out_height == 0 {
        return Err(Error::param(
            "output dimensions",
            format!("{out_width}x{out_height} must be at least 1x1"),
        ));
    }
    let (in_w, in_h) = map.dims();
    let src_x: Vec<usize> = (0..out_width)
        .map(|x| nearest_src_index(x, out_width, in_w))
        .collect();
    let mut data = vec![0.0f32; out_width * out_height];
    data.par_chunks_mut(out_width)
        .enumerate()
        .for_each(|(y, row)| {
            let sy = nearest_src_index(y, out_height, in_h);
            for (x, out) in row.iter_mut().enumerate() {
                *out = map.get(src_x[x], sy);
            }
        });
    Ok(DepthMap::from_validated(out_width, out_height, data))
}

/// Normalized Gaussian kernel for `sigma > 0`: radius `ceil(3 * sigma)`,
/// weights `exp(-i^2 / (2 sigma^2))` scaled to sum exactly 1 in `f64`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    debug_assert!(sigma > 0.0 && sigma.is_finite());
    let radius = (3.0 * sigma).ceil() as usize;
    let mut kernel: Vec<f64> = (-(radius as i64)..=radius as i64)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= total;
    }
    kernel
}

/// Separable Gaussian blur with replicate padding. `sigma == 0` is the
/// identity. Output samples stay within `[0, 1]`.
pub fn gaussian_blur(map: &ScalarMap, sigma: f64) -> Result<ScalarMap> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::param("sigma", format!("{sigma} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(map.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let radius = kernel.len() / 2;
    let (w, h) = map.dims();
    let src = map.data();

    // Horizontal pass, kept in f64 until the final cast.
    // Horizontal pass, tap-outer with the border clamping hoisted out of the
    // inner loop: for each tap only the first and last few pixels clamp, so
    // the body is a straight shifted add. Per output pixel the taps still
    // accumulate in ascending-k order, keeping the result bit-identical to
    // the naive pixel-at-a-time loop.
    let mut mid = vec![0.0f64; w * h];
    mid.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let src_row = &src[y * w..(y + 1) * w];
        let left = f64::from(src_row[0]);
        let right = f64::from(src_row[w - 1]);
        for (k, &wk) in kernel.iter().enumerate() {
            let off = k as i64 - radius as i64;
            let head = usize::try_from((-off).clamp(0, w as i64)).unwrap();
            let body_end = usize::try_from((w as i64 - off).clamp(head as i64, w as i64)).unwrap();
            for out in &mut row[..head] {
                *out += wk * left;
            }
            if body_end > head {
                let src_start = usize::try_from(head as i64 + off).unwrap();
                let body = &src_row[src_start..src_start + (body_end - head)];
                for (out, &s) in row[head..body_end].iter_mut().zip(body) {
                    *out += wk * f64::from(s);
                }
            }
            for out in &mut row[body_end..] {
                *out += wk * right;
            }
        }
    });

    // Vertical pass, tap-outer so every read is a contiguous row. Each
    // output pixel still accumulates taps in ascending-k order, keeping the
    // result bit-identical to the naive pixel-at-a-time loop.
    let mut data = vec![0.0f32; w * h];
    data.par_chunks_mut(w).enumerate().for_each_init(
        || vec![0.0f64; w],
        |acc, (y, row)| {
            acc.fill(0.0);
            for (k, &wk) in kernel.iter().enumerate() {
                let sy = (y as i64 + k as i64 - radius as i64).clamp(0, h as i64 - 1) as usize;
                let src_row = &mid[sy * w..(sy + 1) * w];
                for (a, &m) in acc.iter_mut().zip(src_row) {
                    *a += wk * m;
                }
            }
            for (out, &a) in row.iter_mut().zip(acc.iter()) {
                *out = a.clamp(0.0, 1.0) as f32;
            }
        },
    );
    Ok(ScalarMap::from_validated(w, h, data))
}

/// Bilinear upsampling with pixel-center mapping and border-clamped taps
/// (align-corners-false). Also valid for downscaling or identity dims.
pub fn upsample_bilinear(map: &ScalarMap, out_width: usize, out_height: usize) -> Result<ScalarMap> {
    if out_width == 0 || out_height == 0 {
        return Err(Error::param(
            "output dimensions",
            format!("{out_width}x{out_height} must be at least 1x1"),
        ));
    }
    let (in_w, in_h) = map.dims();
    let src = map.data();

    // Per-axis tap pairs and interpolation weights.
    let taps = |out_len: usize, in_len: usize| -> Vec<(usize, usize, f64)> {
        (0..out_len)
            .map(|o| {
                let pos = (o as f64 + 0.5) * in_len as f64 / out_len as f64 - 0.5;
                let i0 = pos.floor();
                let frac = pos - i0;
                let lo = (i0 as i64).clamp(0, in_len as i64 - 1) as usize;
                let hi = (i0 as i64 + 1).clamp(0, in_len as i64 - 1) as usize;
                (lo, hi, frac)
            })
            .collect()
    };
    let tx = taps(out_width, in_w);
    let ty = taps(out_height, in_h);

    let mut data = vec![0.0f32; out_width * out_height];
    data.par_chunks_mut(out_width)
        .enumerate()
        .for_each(|(y, row)| {
            let (y0, y1, fy) = ty[y];
            for (x, out) in row.iter_mut().enumerate() {
                let (x0, x1, fx) = tx[x];
                let v00 = f64::from(src[y0 * in_w + x0]);
                let v01 = f64::from(src[y0 * in_w + x1]);
                let v10 = f64::from(src[y1 * in_w + x0]);
                let v11 = f64::from(src[y1 * in_w + x1]);
                let top = v00 + (v01 - v00) * fx;
                let bot = v10 + (v11 - v10) * fx;
                *out = (top + (bot - top) * fy).clamp(0.0, 1.0) as f32;
            }
        });
    Ok(ScalarMap::from_validated(out_width, out_height, data))
}

/// Zeroes every 8-connected component of `{v >= binarize_at}` whose area is
/// below `min_area`; all other samples pass through unchanged. Idempotent.
pub fn remove_small_regions(
    map: &ScalarMap,
    binarize_at: f64,
    min_area: usize,
) -> Result<ScalarMap> {
    if !(binarize_at > 0.0 && binarize_at < 1.0) {
        return Err(Error::param(
            "binarize_at",
            format!("{binarize_at} must lie in (0, 1)"),
        ));
    }
    let (w, h) = map.dims();
    let mut data = map.data().to_vec();
    if min_area == 0 {
        return Ok(ScalarMap::from_validated(w, h, data));
    }

    let in_set: Vec<bool> = data.iter().map(|&v| f64::from(v) >= binarize_at).collect();
    let mut seen = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    let mut component: Vec<usize> = Vec::new();

    for start in 0..w * h {
        if !in_set[start] || seen[start] {
            continue;
        }
        component.clear();
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            component.push(i);
            let (x, y) = (i % w, i / w);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = ny as usize * w + nx as usize;
                    if in_set[n] && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        if component.len() < min_area {
            for &i in &component {
                data[i] = 0.0;
            }
        }
    }
    Ok(ScalarMap::from_validated(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_two_by_two_to_one_picks_top_left() {
        let map = DepthMap::new(2, 2, vec![1000.0, -1.0, -1.0, 2000.0]).unwrap();
        let out = resize_nearest(&map, 1, 1).unwrap();
        assert_eq!(out.data(), &[1000.0]);
    }

    #[test]
    fn nearest_downsample_by_four_picks_fixed_columns() {
        // 8 -> 2: src = (o + 0.5) * 4 - 0.5 = {1.5, 5.5}; ties go down -> {1, 5}.
        assert_eq!(nearest_src_index(0, 2, 8), 1);
        assert_eq!(nearest_src_index(1, 2, 8), 5);
    }

    #[test]
    fn nearest_preserves_value_set() {
        let vals = vec![10.0, 20.0, -1.0, 40.0, 50.0, 60.0];
        let map = DepthMap::new(3, 2, vals.clone()).unwrap();
        let out = resize_nearest(&map, 7, 5).unwrap();
        for &v in out.data() {
            assert!(vals.contains(&v), "value {v} not in the source set");
        }
    }

    #[test]
    fn blur_sigma_zero_is_identity() {
        let map = ScalarMap::new(3, 2, vec![0.1, 0.9, 0.3, 0.0, 1.0, 0.5]).unwrap();
        let out = gaussian_blur(&map, 0.0).unwrap();
        assert_eq!(out.data(), map.data());
    }

    #[test]
    fn blur_preserves_constant_maps_exactly() {
        let map = ScalarMap::filled(9, 7, 0.7).unwrap();
        for sigma in [0.5, 1.0, 3.0] {
            let out = gaussian_blur(&map, sigma).unwrap();
            assert_eq!(out.data(), map.data(), "sigma {sigma}");
        }
    }

    #[test]
    fn blur_kernel_radius_is_ceil_three_sigma() {
        assert_eq!(gaussian_kernel(1.0).len(), 7);
        assert_eq!(gaussian_kernel(1.4).len(), 11);
        assert_eq!(gaussian_kernel(3.0).len(), 19);
        assert_eq!(gaussian_kernel(0.5).len(), 5);
    }

    #[test]
    fn bilinear_doubles_one_dim_ramp() {
        let map = ScalarMap::new(2, 1, vec![0.0, 1.0]).unwrap();
        let out = upsample_bilinear(&map, 4, 1).unwrap();
        assert_eq!(out.data(), &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn bilinear_identity_dims_copies_values() {
        let map = ScalarMap::new(3, 2, vec![0.1, 0.9, 0.3, 0.0, 1.0, 0.5]).unwrap();
        let out = upsample_bilinear(&map, 3, 2).unwrap();
        assert_eq!(out.data(), map.data());
    }

    #[test]
    fn small_regions_are_zeroed_larger_ones_survive() {
        // 6x3: a lone pixel on the left, a 2x2 block on the right.
        let mut v = vec![0.0f32; 18];
        v[1] = 0.9; // (1, 0) isolated
        for (x, y) in [(4, 1), (5, 1), (4, 2), (5, 2)] {
            v[y * 6 + x] = 0.8;
        }
        let map = ScalarMap::new(6, 3, v).unwrap();
        let out = remove_small_regions(&map, 0.5, 3).unwrap();
        assert_eq!(out.get(1, 0), 0.0);
        assert_eq!(out.get(4, 1), 0.8);
        assert_eq!(out.get(5, 2), 0.8);
    }

    #[test]
    fn diagonal_pixels_form_one_component() {
        // Two diagonal pixels are 8-connected: area 2 survives min_area 2.
        let mut v = vec![0.0f32; 9];
        v[0] = 1.0;
        v[4] = 1.0;
        let map = ScalarMap::new(3, 3, v).unwrap();
        let out = remove_small_regions(&map, 0.5, 2).unwrap();
        assert_eq!(out.get(0, 0), 1.0);
        assert_eq!(out.get(1, 1), 1.0);
    }

    #[test]
    fn region_removal_is_idempotent() {
        let mut v = vec![0.0f32; 25];
        for i in [0usize, 1, 7, 12, 18, 24] {
            v[i] = 0.6;
        }
        let map = ScalarMap::new(5, 5, v).unwrap();
        let once = remove_small_regions(&map, 0.5, 2).unwrap();
        let twice = remove_small_regions(&once, 0.5, 2).unwrap();
        assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn min_area_zero_changes_nothing() {
        let map = ScalarMap::new(2, 2, vec![0.9, 0.0, 0.0, 0.6]).unwrap();
        let out = remove_small_regions(&map, 0.5, 0).unwrap();
        assert_eq!(out.data(), map.data());
    }

    #[test]
    fn sub_threshold_samples_pass_through_region_removal() {
        let map = ScalarMap::new(3, 1, vec![0.49, 0.9, 0.2]).unwrap();
        let out = remove_small_regions(&map, 0.5, 5).unwrap();
        // 0.9 forms an area-1 region and is zeroed; the rest is untouched.
        assert_eq!(out.data(), &[0.49, 0.0, 0.2]);
    }
}
