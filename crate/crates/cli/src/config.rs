//! Pipeline configuration: one strict JSON file that fully determines
//! behavior. Unknown keys are rejected so a typo in a hyperparameter name
//! fails loudly instead of silently running defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use depthmatte::bayes::BayesParams;
use depthmatte::metrics::MetricParams;
use depthmatte::refine::RefineParams;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::commands::{CmdError, CmdResult};

/// Worker thread count: a fixed count or "auto" (one per logical CPU).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl Threads {
    /// Value for `rayon`'s builder, where 0 means "choose automatically".
    pub fn rayon_count(self) -> usize {
        match self {
            Threads::Auto => 0,
            Threads::Fixed(n) => n,
        }
    }
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Threads::Fixed(n)),
            _ => Err(format!("expected \"auto\" or a positive integer, got {s:?}")),
        }
    }
}

impl Serialize for Threads {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => ser.serialize_str("auto"),
            Threads::Fixed(n) => ser.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct ThreadsVisitor;

        impl Visitor<'_> for ThreadsVisitor {
            type Value = Threads;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"auto\" or a positive integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Threads, E> {
                Threads::from_str(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Threads, E> {
                if v >= 1 {
                    Ok(Threads::Fixed(v as usize))
                } else {
                    Err(E::custom("thread count must be >= 1"))
                }
            }
        }

        de.deserialize_any(ThreadsVisitor)
    }
}

/// Every tunable of the pipeline, with the published defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Weight of the depth error map in fusion.
    pub beta: f64,
    /// Std floor ratio for the background model.
    pub psi: f64,
    /// Maximum sensor range in millimeters.
    pub d_max: f64,
    /// Posterior smoothing constant.
    pub zeta: f64,
    /// Denominator guard of the depth-conditioned update.
    pub posterior_guard: f64,
    /// Prior foreground probability.
    pub prior_fg: f64,
    /// Gaussian sigma over the posterior map (quarter resolution).
    pub blur_sigma: f64,
    /// Foreground threshold for small-region removal.
    pub region_binarize_at: f64,
    /// Minimum connected-region area kept, in quarter-res pixels.
    pub region_min_area: usize,
    /// Fraction of patch cells re-solved by the refiner.
    pub top_fraction: f64,
    /// Patch cell side length on the quarter grid.
    pub cell: usize,
    /// Full-resolution context margin around each patch.
    pub margin: usize,
    /// Gaussian sigma ahead of trimap thresholding (full resolution).
    pub trimap_blur_sigma: f64,
    /// Trimap background threshold.
    pub t_lo: f64,
    /// Trimap foreground threshold.
    pub t_hi: f64,
    /// Derivative-of-Gaussian sigma for the gradient metric.
    pub grad_sigma: f64,
    /// Threshold ladder step for the connectivity metric.
    pub conn_step: f64,
    /// Forgiveness gate for the connectivity metric.
    pub conn_gate: f64,
    /// Worker threads: "auto" or a fixed count.
    pub threads: Threads,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let bayes = BayesParams::default();
        let refine = RefineParams::default();
        let metrics = MetricParams::default();
        Self {
            beta: 0.05,
            psi: 0.01,
            d_max: 5460.0,
            zeta: bayes.zeta,
            posterior_guard: bayes.posterior_guard,
            prior_fg: bayes.prior_fg,
            blur_sigma: bayes.blur_sigma,
            region_binarize_at: bayes.region_binarize_at,
            region_min_area: bayes.region_min_area,
            top_fraction: refine.top_fraction,
            cell: refine.cell,
            margin: refine.margin,
            trimap_blur_sigma: refine.trimap_blur_sigma,
            t_lo: refine.t_lo,
            t_hi: refine.t_hi,
            grad_sigma: metrics.grad_sigma,
            conn_step: metrics.conn_step,
            conn_gate: metrics.conn_gate,
            threads: Threads::Auto,
        }
    }
}

impl PipelineConfig {
    /// Strict load: JSON syntax errors, unknown keys, and out-of-range
    /// values are all data errors.
    pub fn load(path: &Path) -> CmdResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::data(e).context(format!("reading config {}", path.display())))?;
        let config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CmdError::data(e).context(format!("parsing config {}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CmdResult<()> {
        if !(self.beta.is_finite() && (0.0..=1.0).contains(&self.beta)) {
            return Err(CmdError::data(anyhow::anyhow!(
                "invalid beta: {} must be within [0, 1]",
                self.beta
            )));
        }
        if !(self.psi.is_finite() && self.psi > 0.0) {
            return Err(CmdError::data(anyhow::anyhow!(
                "invalid psi: {} must be > 0",
                self.psi
            )));
        }
        if !(self.d_max.is_finite() && self.d_max > 0.0) {
            return Err(CmdError::data(anyhow::anyhow!(
                "invalid d_max: {} must be > 0",
                self.d_max
            )));
        }
        self.bayes().validate().map_err(CmdError::data)?;
        self.refine().validate().map_err(CmdError::data)?;
        self.metrics().validate().map_err(CmdError::data)?;
        Ok(())
    }

    pub fn bayes(&self) -> BayesParams {
        BayesParams {
            prior_fg: self.prior_fg,
            zeta: self.zeta,
            posterior_guard: self.posterior_guard,
            blur_sigma: self.blur_sigma,
            region_binarize_at: self.region_binarize_at,
            region_min_area: self.region_min_area,
        }
    }

    pub fn refine(&self) -> RefineParams {
        RefineParams {
            top_fraction: self.top_fraction,
            cell: self.cell,
            margin: self.margin,
            trimap_blur_sigma: self.trimap_blur_sigma,
            t_lo: self.t_lo,
            t_hi: self.t_hi,
        }
    }

    pub fn metrics(&self) -> MetricParams {
        MetricParams {
            grad_sigma: self.grad_sigma,
            conn_step: self.conn_step,
            conn_gate: self.conn_gate,
        }
    }
}
