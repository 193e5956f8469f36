//! Full-resolution refinement of a quarter-resolution matte.
//!
//! The fused error map is divided into cells; the worst cells (by summed
//! error) are re-solved at full resolution by a pluggable patch refiner,
//! everything else keeps the bilinearly upsampled matte. The refined matte
//! is then re-weighed against the observed depth pixel by pixel, and finally
//! collapsed into a trimap.

use rayon::prelude::*;

use crate::bayes::{likelihood_fg, BayesParams};
use crate::bgmodel::BackgroundDepthModel;
use crate::error::{Error, Result};
use crate::imgcore::{
    gaussian_blur, nearest_src_index, upsample_bilinear, DepthMap, RgbImage, ScalarMap, Trimap,
};
use crate::predictors::PatchRefiner;

/// Full-resolution pixels per quarter-resolution pixel along each axis.
const SCALE: usize = 4;

/// Parameters of patch selection, refinement geometry, and trimap extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineParams {
    /// Fraction of grid cells re-solved at full resolution.
    pub top_fraction: f64,
    /// Cell side in quarter-resolution pixels.
    pub cell: usize,
    /// Full-resolution context margin around each patch interior.
    pub margin: usize,
    /// Gaussian sigma applied before trimap thresholding.
    pub trimap_blur_sigma: f64,
    /// Alpha at or below this is background.
    pub t_lo: f64,
    /// Alpha at or above this is foreground.
    pub t_hi: f64,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            top_fraction: 0.1,
            cell: 4,
            margin: 8,
            trimap_blur_sigma: 3.0,
            t_lo: 0.25,
            t_hi: 0.8,
        }
    }
}

impl RefineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(Error::param(
                "top_fraction",
                format!("{} must lie in (0, 1]", self.top_fraction),
            ));
        }
        if self.cell == 0 {
            return Err(Error::param("cell", "must be at least 1"));
        }
        if !(self.trimap_blur_sigma.is_finite() && self.trimap_blur_sigma >= 0.0) {
            return Err(Error::param(
                "trimap_blur_sigma",
                format!("{} must be >= 0", self.trimap_blur_sigma),
            ));
        }
        if !(self.t_lo > 0.0 && self.t_lo < self.t_hi && self.t_hi < 1.0) {
            return Err(Error::param(
                "trimap thresholds",
                format!("need 0 < t_lo < t_hi < 1, got {} and {}", self.t_lo, self.t_hi),
            ));
        }
        Ok(())
    }
}

/// Cells chosen for full-resolution refinement, in descending order of
/// summed error with row-major order breaking ties.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    /// Cell side in quarter-resolution pixels.
    pub cell: usize,
    /// Full-resolution context margin.
    pub margin: usize,
    /// Selected cells as (row, col) grid coordinates.
    pub selected: Vec<(usize, usize)>,
}

/// Rectangle in pixel coordinates, used for a patch's interior placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Full-resolution refinement input: RGB, depth, and the current matte over
/// the patch rectangle (interior plus context margin). `interior` locates
/// the region the refiner must re-solve, relative to the patch origin;
/// `origin_x`/`origin_y` place that origin in frame coordinates for
/// refiners that condition on position.
#[derive(Debug, Clone)]
pub struct RgbdPatch {
    pub origin_x: usize,
    pub origin_y: usize,
    pub width: usize,
    pub height: usize,
    /// Interleaved RGB, `width * height * 3`.
    pub rgb: Vec<f32>,
    /// Depth in millimeters with the unknown sentinel, `width * height`.
    pub depth: Vec<f32>,
    /// Current matte values, `width * height`.
    pub alpha: Vec<f32>,
    pub interior: PatchRect,
}

/// Refined alpha for one patch interior (interior dimensions, not padded).
#[derive(Debug, Clone)]
pub struct AlphaPatch {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

/// Ranks error cells and keeps the top `ceil(top_fraction * n_cells)`,
/// skipping cells with exactly zero summed error. The grid covers the map
/// with `ceil(dim / cell)` cells per axis; cells extending past the border
/// replicate edge pixels into the sum.
pub fn select_patches(e_fused: &ScalarMap, params: &RefineParams) -> Result<PatchGrid> {
    params.validate()?;
    let (w, h) = e_fused.dims();
    let cell = params.cell;
    let cols = w.div_ceil(cell);
    let rows = h.div_ceil(cell);
    let n_cells = rows * cols;

    let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(n_cells);
    for r in 0..rows {
        for c in 0..cols {
            let mut sum = 0.0f64;
            for cy in 0..cell {
                let y = (r * cell + cy).min(h - 1);
                for cx in 0..cell {
                    let x = (c * cell + cx).min(w - 1);
                    sum += f64::from(e_fused.get(x, y));
                }
            }
            ranked.push((sum, r * cols + c));
        }
    }
    ranked.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let quota = ((params.top_fraction * n_cells as f64).ceil() as usize).min(n_cells);
    let selected = ranked
        .iter()
        .take(quota)
        .filter(|(sum, _)| *sum > 0.0)
        .map(|&(_, idx)| (idx / cols, idx % cols))
        .collect();
    Ok(PatchGrid {
        cell,
        margin: params.margin,
        selected,
    })
}

/// Upsamples the quarter-resolution matte to frame resolution and re-solves
/// the selected worst cells with `refiner`. With a passthrough refiner the
/// result equals the plain upsampled matte bit for bit.
pub fn refine_alpha(
    frame: &RgbImage,
    depth: &DepthMap,
    a_raw: &ScalarMap,
    e_fused: &ScalarMap,
    refiner: &dyn PatchRefiner,
    params: &RefineParams,
) -> Result<ScalarMap> {
    params.validate()?;
    let (fw, fh) = frame.dims();
    if depth.dims() != (fw, fh) {
        return Err(Error::dims("refine frame vs depth", (fw, fh), depth.dims()));
    }
    if a_raw.dims() != e_fused.dims() {
        return Err(Error::dims(
            "refine matte vs error map",
            a_raw.dims(),
            e_fused.dims(),
        ));
    }
    let quarter = crate::imgcore::quarter_dims(fw, fh);
    if a_raw.dims() != quarter {
        return Err(Error::dims(
            "refine matte vs quarter resolution",
            a_raw.dims(),
            quarter,
        ));
    }

    let upsampled = upsample_bilinear(a_raw, fw, fh)?;
    let grid = select_patches(e_fused, params)?;

    // Patch extraction is read-only per cell; interiors never overlap.
    let patches: Vec<RgbdPatch> = grid
        .selected
        .par_iter()
        .map(|&(r, c)| {
            let x0 = c * grid.cell * SCALE;
            let y0 = r * grid.cell * SCALE;
            let x1 = (x0 + grid.cell * SCALE).min(fw);
            let y1 = (y0 + grid.cell * SCALE).min(fh);
            let px0 = x0.saturating_sub(grid.margin);
            let py0 = y0.saturating_sub(grid.margin);
            let px1 = (x1 + grid.margin).min(fw);
            let py1 = (y1 + grid.margin).min(fh);
            let (pw, ph) = (px1 - px0, py1 - py0);

            let mut rgb = Vec::with_capacity(pw * ph * 3);
            let mut d = Vec::with_capacity(pw * ph);
            let mut a = Vec::with_capacity(pw * ph);
            for y in py0..py1 {
                for x in px0..px1 {
                    let c3 = frame.get(x, y);
                    rgb.extend_from_slice(&c3);
                    d.push(depth.get(x, y));
                    a.push(upsampled.get(x, y));
                }
            }
            RgbdPatch {
                origin_x: px0,
                origin_y: py0,
                width: pw,
                height: ph,
                rgb,
                depth: d,
                alpha: a,
                interior: PatchRect {
                    x: x0 - px0,
                    y: y0 - py0,
                    width: x1 - x0,
                    height: y1 - y0,
                },
            }
        })
        .collect();

    let refined = refiner.refine_batch(&patches)?;
    if refined.len() != patches.len() {
        return Err(Error::Refiner(format!(
            "returned {} patches for {} inputs",
            refined.len(),
            patches.len()
        )));
    }

    let mut data = upsampled.data().to_vec();
    for (((r, c), patch), out) in grid.selected.iter().zip(&patches).zip(&refined) {
        let interior = patch.interior;
        if out.width != interior.width || out.height != interior.height {
            return Err(Error::Refiner(format!(
                "cell ({r}, {c}): output {}x{} does not match interior {}x{}",
                out.width, out.height, interior.width, interior.height
            )));
        }
        let x0 = c * grid.cell * SCALE;
        let y0 = r * grid.cell * SCALE;
        for iy in 0..interior.height {
            let row = (y0 + iy) * fw + x0;
            for ix in 0..interior.width {
                data[row + ix] = out.values[iy * out.width + ix].clamp(0.0, 1.0);
            }
        }
    }
    Ok(ScalarMap::from_validated(fw, fh, data))
}

/// Re-weighs a refined matte against the observed depth: with the matte
/// value as per-pixel prior, returns
/// `P_F * prior / (P_B * (1 - prior) + P_F * prior + guard)`.
/// Pixels with unobserved depth keep their prior exactly; the guard only
/// keeps the ratio defined when a likelihood underflows.
pub fn depth_posterior_update(
    a_fine: &ScalarMap,
    depth: &DepthMap,
    model: &BackgroundDepthModel,
    params: &BayesParams,
) -> Result<ScalarMap> {
    params.validate()?;
    let (w, h) = a_fine.dims();
    if depth.dims() != (w, h) {
        return Err(Error::dims("posterior update", (w, h), depth.dims()));
    }
    let (mw, mh) = model.dims();
    let col_map: Vec<usize> = (0..w).map(|x| nearest_src_index(x, w, mw)).collect();
    let row_map: Vec<usize> = (0..h).map(|y| nearest_src_index(y, h, mh)).collect();

    let prior_data = a_fine.data();
    let depth_data = depth.data();
    let guard = params.posterior_guard;

    // One truncation normalizer per model pixel, not per frame pixel.
    let norms: Vec<f64> = model
        .mean()
        .iter()
        .zip(model.std())
        .map(|(&m, &s)| crate::bayes::bg_truncation_norm(f64::from(m), f64::from(s)))
        .collect();

    let mut data = vec![0.0f32; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let mrow = row_map[y] * mw;
        let base = y * w;
        for (x, out) in row.iter_mut().enumerate() {
            let mi = mrow + col_map[x];
            let mean = f64::from(model.mean()[mi]);
            let std = f64::from(model.std()[mi]);
            let d = f64::from(depth_data[base + x]);
            let prior = f64::from(prior_data[base + x]);
            let pf = likelihood_fg(d, mean);
            let pb = crate::bayes::likelihood_bg_prenorm(d, mean, std, norms[mi]);
            let v = if pf == 0.0 && pb == 0.0 {
                prior
            } else {
                (pf * prior) / (pb * (1.0 - prior) + pf * prior + guard)
            };
            *out = v.clamp(0.0, 1.0) as f32;
        }
    });
    Ok(ScalarMap::from_validated(w, h, data))
}

/// Blurs the matte and maps it onto `{0, 0.5, 1}`: at or above `t_hi` is
/// foreground, at or below `t_lo` background, everything else unknown.
pub fn make_trimap(a_post: &ScalarMap, params: &RefineParams) -> Result<Trimap> {
    params.validate()?;
    let blurred = gaussian_blur(a_post, params.trimap_blur_sigma)?;
    let (w, h) = blurred.dims();
    let data = blurred
        .data()
        .iter()
        .map(|&v| {
            let v = f64::from(v);
            if v >= params.t_hi {
                1.0
            } else if v <= params.t_lo {
                0.0
            } else {
                0.5
            }
        })
        .collect();
    Ok(Trimap::from_validated(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgmodel::build_background_model;
    use crate::predictors::PassthroughRefiner;

    fn params() -> RefineParams {
        RefineParams::default()
    }

    #[test]
    fn uniform_error_selects_quota_in_row_major_order() {
        // 40x40 map, cell 4 -> 10x10 grid; every cell sums to the same
        // positive error, so the tie-break yields the first ten cells.
        let map = ScalarMap::filled(40, 40, 0.25).unwrap();
        let grid = select_patches(&map, &params()).unwrap();
        let expected: Vec<(usize, usize)> = (0..10).map(|c| (0, c)).collect();
        assert_eq!(grid.selected, expected);
    }

    #[test]
    fn zero_error_cells_are_never_selected() {
        let map = ScalarMap::filled(40, 40, 0.0).unwrap();
        let grid = select_patches(&map, &params()).unwrap();
        assert!(grid.selected.is_empty());

        // One hot cell: only it is selected even though the quota is 10.
        let mut v = vec![0.0f32; 1600];
        v[5 * 40 + 21] = 0.9; // cell row 1, col 5
        let map = ScalarMap::new(40, 40, v).unwrap();
        let grid = select_patches(&map, &params()).unwrap();
        assert_eq!(grid.selected, vec![(1, 5)]);
    }

    #[test]
    fn selection_orders_by_descending_cell_error() {
        let mut v = vec![0.0f32; 1600];
        v[0] = 0.3; // cell (0, 0)
        v[9 * 40 + 38] = 0.8; // cell (2, 9)
        v[22 * 40 + 18] = 0.5; // cell (5, 4)
        let map = ScalarMap::new(40, 40, v).unwrap();
        let grid = select_patches(&map, &params()).unwrap();
        assert_eq!(grid.selected, vec![(2, 9), (5, 4), (0, 0)]);
    }

    #[test]
    fn passthrough_refinement_equals_plain_upsampling() {
        let (fw, fh) = (64, 48);
        let frame = RgbImage::new(fw, fh, vec![0.5; fw * fh * 3]).unwrap();
        let depth = DepthMap::new(fw, fh, vec![1000.0; fw * fh]).unwrap();
        let (qw, qh) = crate::imgcore::quarter_dims(fw, fh);
        let a_raw = ScalarMap::new(
            qw,
            qh,
            (0..qw * qh).map(|i| (i % 7) as f32 / 7.0).collect(),
        )
        .unwrap();
        let e_fused = ScalarMap::filled(qw, qh, 0.3).unwrap();
        let refined =
            refine_alpha(&frame, &depth, &a_raw, &e_fused, &PassthroughRefiner, &params())
                .unwrap();
        let upsampled = upsample_bilinear(&a_raw, fw, fh).unwrap();
        assert_eq!(refined.data(), upsampled.data());
    }

    #[test]
    fn refine_rejects_non_quarter_matte() {
        let frame = RgbImage::new(64, 48, vec![0.5; 64 * 48 * 3]).unwrap();
        let depth = DepthMap::new(64, 48, vec![1000.0; 64 * 48]).unwrap();
        let wrong = ScalarMap::filled(10, 10, 0.5).unwrap();
        assert!(matches!(
            refine_alpha(&frame, &depth, &wrong, &wrong, &PassthroughRefiner, &params()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn flat_model(w: usize, h: usize, mean: f32) -> BackgroundDepthModel {
        let maps = [
            DepthMap::new(w, h, vec![mean - 10.0; w * h]).unwrap(),
            DepthMap::new(w, h, vec![mean + 10.0; w * h]).unwrap(),
        ];
        build_background_model(&maps, 0.01, 5460.0).unwrap()
    }

    #[test]
    fn update_keeps_prior_where_depth_is_unknown() {
        let model = flat_model(2, 2, 3000.0);
        let a = ScalarMap::new(8, 8, (0..64).map(|i| i as f32 / 63.0).collect()).unwrap();
        let depth = DepthMap::new(8, 8, vec![-1.0; 64]).unwrap();
        let out = depth_posterior_update(&a, &depth, &model, &BayesParams::default()).unwrap();
        assert_eq!(out.data(), a.data());
    }

    #[test]
    fn update_amplifies_foreground_consistent_depth() {
        let model = flat_model(2, 2, 3000.0);
        let a = ScalarMap::filled(8, 8, 0.5).unwrap();
        let depth = DepthMap::new(8, 8, vec![1000.0; 64]).unwrap();
        let out = depth_posterior_update(&a, &depth, &model, &BayesParams::default()).unwrap();
        assert!(out.data().iter().all(|&v| v > 0.99), "got {:?}", out.get(0, 0));
    }

    #[test]
    fn update_suppresses_background_consistent_depth() {
        let model = flat_model(2, 2, 3000.0);
        let a = ScalarMap::filled(8, 8, 0.5).unwrap();
        let depth = DepthMap::new(8, 8, vec![3000.0; 64]).unwrap();
        let out = depth_posterior_update(&a, &depth, &model, &BayesParams::default()).unwrap();
        assert!(out.data().iter().all(|&v| v < 0.05), "got {:?}", out.get(0, 0));
    }

    #[test]
    fn update_zero_prior_is_absorbing() {
        let model = flat_model(1, 1, 3000.0);
        let a = ScalarMap::filled(4, 4, 0.0).unwrap();
        let depth = DepthMap::new(4, 4, vec![1000.0; 16]).unwrap();
        let out = depth_posterior_update(&a, &depth, &model, &BayesParams::default()).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn trimap_thresholds_are_inclusive() {
        let p = RefineParams {
            trimap_blur_sigma: 0.0,
            ..params()
        };
        let a = ScalarMap::new(4, 1, vec![0.25, 0.8, 0.250001, 0.79999]).unwrap();
        let tri = make_trimap(&a, &p).unwrap();
        assert_eq!(tri.data()[0], 0.0);
        assert_eq!(tri.data()[1], 1.0);
        assert_eq!(tri.data()[2], 0.5);
        assert_eq!(tri.data()[3], 0.5);
    }

    #[test]
    fn trimap_uses_only_the_three_levels() {
        let vals: Vec<f32> = (0..100).map(|i| i as f32 / 99.0).collect();
        let a = ScalarMap::new(10, 10, vals).unwrap();
        let tri = make_trimap(&a, &params()).unwrap();
        assert!(tri.data().iter().all(|&v| v == 0.0 || v == 0.5 || v == 1.0));
    }
}
