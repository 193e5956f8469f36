//! Real-time background matting for RGB-D cameras.
//!
//! Given a stack of pure-background RGB-D captures, the library builds a
//! per-pixel statistical model of the background depth, turns each live
//! depth frame into a foreground posterior at quarter resolution, fuses that
//! evidence with the error estimate of any external matting predictor,
//! re-solves the least trustworthy full-resolution patches, re-weighs the
//! result against the observed depth pixel by pixel, and finally emits a
//! trimap.
//!
//! The stages are exposed individually so callers can run any prefix of the
//! pipeline:
//!
//! 1. [`bgmodel::build_background_model`]: background depth statistics.
//! 2. [`bayes::depth_posterior_map`]: per-pixel foreground posterior, blur,
//!    small-region cleanup.
//! 3. [`fusion::residual_map`] / [`fusion::fuse_error_maps`]: depth
//!    residual and convex fusion with the predictor's error map.
//! 4. [`refine::refine_alpha`]: patch selection and full-resolution
//!    re-solve of the worst cells.
//! 5. [`refine::depth_posterior_update`]: depth-conditioned correction of
//!    the full-resolution matte.
//! 6. [`refine::make_trimap`]: blur and three-way thresholding.
//!
//! All heavy loops parallelize over rows with deterministic per-pixel
//! arithmetic, so outputs are bit-identical across thread counts.

pub mod bayes;
pub mod bgmodel;
pub mod dataset;
pub mod error;
pub mod fusion;
pub mod imgcore;
pub mod metrics;
pub mod predictors;
pub mod refine;

pub use error::{Error, Result};
