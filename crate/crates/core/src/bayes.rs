//! Per-pixel Bayesian foreground inference from depth.
//!
//! Given the background depth distribution at a pixel, an observed depth d
//! is explained by one of two likelihoods:
//!
//! * foreground: uniform over `(0, mean]`, density `1/mean`;
//! * background: normal `N(mean, std)` truncated to `[0, inf)`, i.e. the
//!   density rescaled by `1 / Phi(mean/std)` so it integrates to 1.
//!
//! The foreground posterior combines them with prior `prior_fg` and a
//! smoothing constant `zeta` in both numerator and denominator:
//!
//! ```text
//! (P_F(d) * prior_fg + prior_fg * zeta)
//! -----------------------------------------------
//! (P_F(d) * prior_fg + P_B(d) * prior_bg + zeta)
//! ```
//!
//! An unobserved depth (d <= 0) zeroes both likelihoods and the posterior
//! collapses to the prior. `zeta` is calibrated for depths in millimeters;
//! likelihood values are densities per millimeter.

use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::bgmodel::BackgroundDepthModel;
use crate::error::{Error, Result};
use crate::imgcore::{gaussian_blur, remove_small_regions, DepthMap, ScalarMap};

// Nearest double to sqrt(2*pi); note sqrt(TAU) evaluates one ulp low.
const SQRT_2PI: f64 = 2.5066282746310007;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Parameters of the posterior computation and its map-level post-processing.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesParams {
    /// Prior foreground probability at every pixel.
    pub prior_fg: f64,
    /// Smoothing constant in the posterior; keeps the ratio defined and
    /// damps extreme likelihood ratios. Unit-dependent (per-millimeter).
    pub zeta: f64,
    /// Tiny denominator guard for the depth-conditioned update of a refined
    /// matte; numerical only, orders of magnitude below any real likelihood.
    pub posterior_guard: f64,
    /// Gaussian sigma applied to the posterior map (0 disables).
    pub blur_sigma: f64,
    /// Threshold defining foreground regions for small-region removal.
    pub region_binarize_at: f64,
    /// Connected components smaller than this are zeroed (0 disables).
    pub region_min_area: usize,
}

impl Default for BayesParams {
    fn default() -> Self {
        Self {
            prior_fg: 0.5,
            zeta: 1e-3,
            posterior_guard: 1e-12,
            blur_sigma: 1.0,
            region_binarize_at: 0.5,
            region_min_area: 100,
        }
    }
}

impl BayesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_fg > 0.0 && self.prior_fg < 1.0) {
            return Err(Error::param(
                "prior_fg",
                format!("{} must lie in (0, 1)", self.prior_fg),
            ));
        }
        if !(self.zeta.is_finite() && self.zeta > 0.0) {
            return Err(Error::param("zeta", format!("{} must be > 0", self.zeta)));
        }
        if !(self.posterior_guard.is_finite() && self.posterior_guard > 0.0) {
            return Err(Error::param(
                "posterior_guard",
                format!("{} must be > 0", self.posterior_guard),
            ));
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return Err(Error::param(
                "blur_sigma",
                format!("{} must be >= 0", self.blur_sigma),
            ));
        }
        if !(self.region_binarize_at > 0.0 && self.region_binarize_at < 1.0) {
            return Err(Error::param(
                "region_binarize_at",
                format!("{} must lie in (0, 1)", self.region_binarize_at),
            ));
        }
        Ok(())
    }
}

/// Foreground likelihood: uniform density `1/mean` on `(0, mean]`, zero
/// elsewhere (including unobserved depths).
///
/// Panics if `mean` is not strictly positive.
#[inline]
pub fn likelihood_fg(d: f64, mean: f64) -> f64 {
    assert!(mean > 0.0, "likelihood_fg requires mean > 0, got {mean}");
    if d > 0.0 && d <= mean {
        1.0 / mean
    } else {
        0.0
    }
}

/// Standard normal CDF.
#[inline]
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Truncation normalizer of the background likelihood. Depends only on the
/// model pixel, so full-resolution sweeps hoist it out of the pixel loop.
#[inline]
pub(crate) fn bg_truncation_norm(mean: f64, std: f64) -> f64 {
    phi(mean / std)
}

/// Background likelihood with the normalizer already computed; the division
/// stays in place so results are bit-identical to [`likelihood_bg`].
#[inline]
pub(crate) fn likelihood_bg_prenorm(d: f64, mean: f64, std: f64, norm: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let z = (d - mean) / std;
    let density = (-0.5 * z * z).exp() / (std * SQRT_2PI);
    density / norm
}

/// Background likelihood: `N(mean, std)` truncated to `[0, inf)`, rescaled
/// so it integrates to 1 over the domain; zero for unobserved depths.
///
/// Panics if `mean` or `std` is not strictly positive.
#[inline]
pub fn likelihood_bg(d: f64, mean: f64, std: f64) -> f64 {
    assert!(
        mean > 0.0 && std > 0.0,
        "likelihood_bg requires mean > 0 and std > 0, got mean {mean}, std {std}"
    );
    likelihood_bg_prenorm(d, mean, std, bg_truncation_norm(mean, std))
}

/// Foreground posterior for one depth observation against one background
/// distribution. Unobserved depth (d <= 0) returns exactly the prior.
#[inline]
pub fn posterior_fg(d: f64, mean: f64, std: f64, params: &BayesParams) -> f64 {
    let prior = params.prior_fg;
    if d <= 0.0 {
        // No depth evidence: both likelihoods vanish and the regularized
        // ratio reduces to the prior. Return it directly rather than via
        // the division, which can drift by an ulp.
        return prior;
    }
    let pf = likelihood_fg(d, mean);
    let pb = likelihood_bg(d, mean, std);
    (pf * prior + prior * params.zeta) / (pf * prior + pb * (1.0 - prior) + params.zeta)
}

/// Per-pixel posterior over a depth map, followed by Gaussian smoothing and
/// small-region removal. The depth map must match the model resolution.
pub fn depth_posterior_map(
    depth: &DepthMap,
    model: &BackgroundDepthModel,
    params: &BayesParams,
) -> Result<ScalarMap> {
    params.validate()?;
    if depth.dims() != model.dims() {
        return Err(Error::dims(
            "depth posterior input",
            depth.dims(),
            model.dims(),
        ));
    }
    let (w, h) = depth.dims();
    let depth_data = depth.data();
    let mean = model.mean();
    let std = model.std();

    let mut data = vec![0.0f32; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let base = y * w;
        for (x, out) in row.iter_mut().enumerate() {
            let i = base + x;
            let p = posterior_fg(
                f64::from(depth_data[i]),
                f64::from(mean[i]),
                f64::from(std[i]),
                params,
            );
            *out = p.clamp(0.0, 1.0) as f32;
        }
    });
    let map = ScalarMap::from_validated(w, h, data);
    let blurred = gaussian_blur(&map, params.blur_sigma)?;
    if params.region_min_area == 0 {
        Ok(blurred)
    } else {
        remove_small_regions(
            &blurred,
            params.region_binarize_at,
            params.region_min_area,
        )
    }
}
