//! Pluggable sources for the quarter-resolution matte and its error map,
//! and the full-resolution patch refiner interface.
//!
//! The pipeline does not bundle a learned matting network; it consumes one
//! through these traits. [`FilePredictor`] replays precomputed outputs from
//! disk and [`DepthBaselinePredictor`] runs depth-only inference, which is
//! also the fallback when no network output exists for a frame.

use std::path::Path;

use crate::bayes::{depth_posterior_map, BayesParams};
use crate::bgmodel::BackgroundDepthModel;
use crate::error::{Error, Result};
use crate::imgcore::{load_scalar_png, resize_nearest, DepthMap, RgbImage, ScalarMap};
use crate::refine::{AlphaPatch, RgbdPatch};

/// Quarter-resolution matte plus the predictor's own error estimate.
#[derive(Debug, Clone)]
pub struct RawPrediction {
    pub a_raw: ScalarMap,
    pub e_rgb: ScalarMap,
}

impl RawPrediction {
    pub fn new(a_raw: ScalarMap, e_rgb: ScalarMap) -> Result<Self> {
        if a_raw.dims() != e_rgb.dims() {
            return Err(Error::dims("prediction vs error map", a_raw.dims(), e_rgb.dims()));
        }
        Ok(Self { a_raw, e_rgb })
    }
}

/// Produces the quarter-resolution matte and error estimate for one frame.
pub trait RawAlphaPredictor: Sync {
    fn predict(
        &self,
        frame: &RgbImage,
        background: &RgbImage,
        depth: Option<&DepthMap>,
    ) -> Result<RawPrediction>;
}

/// Replays a matte and error map stored as 8-bit grayscale PNGs.
#[derive(Debug, Clone)]
pub struct FilePredictor {
    prediction: RawPrediction,
}

impl FilePredictor {
    pub fn from_paths(a_raw_png: &Path, e_rgb_png: &Path) -> Result<Self> {
        let a_raw = load_scalar_png(a_raw_png)?;
        let e_rgb = load_scalar_png(e_rgb_png)?;
        Ok(Self {
            prediction: RawPrediction::new(a_raw, e_rgb)?,
        })
    }

    pub fn from_maps(a_raw: ScalarMap, e_rgb: ScalarMap) -> Result<Self> {
        Ok(Self {
            prediction: RawPrediction::new(a_raw, e_rgb)?,
        })
    }
}

impl RawAlphaPredictor for FilePredictor {
    fn predict(
        &self,
        _frame: &RgbImage,
        _background: &RgbImage,
        _depth: Option<&DepthMap>,
    ) -> Result<RawPrediction> {
        Ok(self.prediction.clone())
    }
}

/// Depth-only inference: the depth posterior is the matte and the error
/// estimate is zero, so fusion trusts the depth residual alone.
#[derive(Debug, Clone)]
pub struct DepthBaselinePredictor {
    model: BackgroundDepthModel,
    params: BayesParams,
}

impl DepthBaselinePredictor {
    pub fn new(model: BackgroundDepthModel, params: BayesParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { model, params })
    }
}

impl RawAlphaPredictor for DepthBaselinePredictor {
    fn predict(
        &self,
        _frame: &RgbImage,
        _background: &RgbImage,
        depth: Option<&DepthMap>,
    ) -> Result<RawPrediction> {
        let depth = depth.ok_or_else(|| {
            Error::Predictor("depth-only inference needs a depth frame".into())
        })?;
        let (mw, mh) = self.model.dims();
        let resized;
        let at_model_res = if depth.dims() == (mw, mh) {
            depth
        } else {
            resized = resize_nearest(depth, mw, mh)?;
            &resized
        };
        let a_raw = depth_posterior_map(at_model_res, &self.model, &self.params)?;
        let e_rgb = ScalarMap::filled(mw, mh, 0.0)?;
        RawPrediction::new(a_raw, e_rgb)
    }
}

/// Re-solves the worst full-resolution patches of the matte.
pub trait PatchRefiner: Sync {
    /// Returns one alpha interior per input patch, in input order, each
    /// matching its patch's interior dimensions.
    fn refine_batch(&self, patches: &[RgbdPatch]) -> Result<Vec<AlphaPatch>>;
}

/// Keeps every patch interior unchanged. Stands in where no learned refiner
/// is available and pins down the refinement plumbing in tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassthroughRefiner;

impl PatchRefiner for PassthroughRefiner {
    fn refine_batch(&self, patches: &[RgbdPatch]) -> Result<Vec<AlphaPatch>> {
        Ok(patches
            .iter()
            .map(|p| {
                let r = p.interior;
                let mut values = Vec::with_capacity(r.width * r.height);
                for iy in 0..r.height {
                    let row = (r.y + iy) * p.width + r.x;
                    values.extend_from_slice(&p.alpha[row..row + r.width]);
                }
                AlphaPatch {
                    width: r.width,
                    height: r.height,
                    values,
                }
            })
            .collect())
    }
}
