//! `matte`: run the full pipeline on one test frame and write the refined
//! matte, the depth-updated matte, the trimap, and per-stage timings.

use std::path::PathBuf;
use std::time::Instant;

use depthmatte::bayes::depth_posterior_map;
use depthmatte::bgmodel::load_model;
use depthmatte::dataset::{load_scene, test_frame_ids, TestFrame};
use depthmatte::fusion::{fuse_error_maps, residual_map};
use depthmatte::imgcore::{
    quarter_dims, resize_nearest, save_scalar_png, save_trimap_png, Trimap, ScalarMap,
};
use depthmatte::predictors::{
    DepthBaselinePredictor, FilePredictor, PassthroughRefiner, RawAlphaPredictor,
};
use depthmatte::refine::{depth_posterior_update, make_trimap, refine_alpha};
use depthmatte::Error;
use serde::Serialize;

use crate::commands::{echo_config, write_json, CmdError, CmdResult};
use crate::config::PipelineConfig;

/// Which raw alpha predictor feeds the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PredictorChoice {
    /// Bayesian depth posterior as the raw matte (no RGB network).
    DepthBaseline,
    /// Replay `<frame>_araw.png` / `<frame>_ergb.png` from --predictor-dir.
    File,
}

pub struct MatteArgs {
    pub scene_dir: PathBuf,
    pub frame_id: String,
    pub model_path: PathBuf,
    pub out_dir: PathBuf,
    pub predictor: PredictorChoice,
    pub predictor_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct StageTiming {
    stage: String,
    ms: f64,
}

#[derive(Serialize)]
struct TimingReport {
    frame: String,
    resolution: String,
    predictor: String,
    stages: Vec<StageTiming>,
    total_ms: f64,
}

struct StageClock {
    stages: Vec<StageTiming>,
}

impl StageClock {
    fn new() -> Self {
        Self { stages: Vec::new() }
    }

    /// Runs one pipeline stage, recording wall time; failures carry the
    /// stage name.
    fn run<T>(
        &mut self,
        name: &str,
        f: impl FnOnce() -> depthmatte::Result<T>,
    ) -> CmdResult<T> {
        let t0 = Instant::now();
        let out = f().map_err(|e| CmdError::data(e).context(format!("stage {name} failed")))?;
        self.stages.push(StageTiming {
            stage: name.to_string(),
            ms: t0.elapsed().as_secs_f64() * 1e3,
        });
        Ok(out)
    }

    fn total_ms(&self) -> f64 {
        self.stages.iter().map(|s| s.ms).sum()
    }
}

pub fn run(args: &MatteArgs, config: &PipelineConfig, verbose: bool) -> CmdResult<()> {
    let scene = load_scene(&args.scene_dir)?;
    let ids = test_frame_ids(&args.scene_dir)?;
    let idx = ids
        .iter()
        .position(|id| *id == args.frame_id)
        .ok_or_else(|| {
            CmdError::data(anyhow::anyhow!(
                "frame {:?} not found in {} (available: {})",
                args.frame_id,
                args.scene_dir.display(),
                if ids.is_empty() { "none".to_string() } else { ids.join(", ") }
            ))
        })?;
    let frame = &scene.tests()[idx];

    let model = load_model(&args.model_path)?;
    let (w, h) = scene.dims();
    let (qw, qh) = quarter_dims(w, h);
    if model.dims() != (qw, qh) {
        return Err(CmdError::data(Error::DimensionMismatch {
            context: "model vs scene quarter resolution",
            left_width: model.dims().0,
            left_height: model.dims().1,
            right_width: qw,
            right_height: qh,
        }));
    }

    let bayes = config.bayes();
    let predictor: Box<dyn RawAlphaPredictor> = match args.predictor {
        PredictorChoice::DepthBaseline => {
            Box::new(DepthBaselinePredictor::new(model.clone(), bayes.clone()).map_err(CmdError::data)?)
        }
        PredictorChoice::File => {
            let dir = args.predictor_dir.as_ref().ok_or_else(|| {
                CmdError::usage("--predictor file requires --predictor-dir")
            })?;
            Box::new(FilePredictor::from_paths(
                &dir.join(format!("{}_araw.png", args.frame_id)),
                &dir.join(format!("{}_ergb.png", args.frame_id)),
            )?)
        }
    };

    let (a_fine, a_post, trimap, clock) =
        matte_frame(frame, &scene.backgrounds()[0].0, &model, predictor.as_ref(), config)?;

    std::fs::create_dir_all(&args.out_dir)?;
    save_scalar_png(&a_fine, &args.out_dir.join("alpha.png"))?;
    save_scalar_png(&a_post, &args.out_dir.join("alpha_post.png"))?;
    save_trimap_png(&trimap, &args.out_dir.join("trimap.png"))?;
    let report = TimingReport {
        frame: args.frame_id.clone(),
        resolution: format!("{w}x{h}"),
        predictor: format!("{:?}", args.predictor).to_lowercase(),
        total_ms: clock.total_ms(),
        stages: clock.stages,
    };
    write_json(&args.out_dir.join("timings.json"), &report)?;
    echo_config(&args.out_dir, config)?;

    if verbose {
        for s in &report.stages {
            eprintln!("  {:>18} {:8.3} ms", s.stage, s.ms);
        }
    }
    println!(
        "wrote {} (alpha.png, alpha_post.png, trimap.png, timings.json) in {:.1} ms",
        args.out_dir.display(),
        report.total_ms
    );
    Ok(())
}

type MatteOutputs = (ScalarMap, ScalarMap, Trimap, StageClock);

/// The per-frame pipeline shared by `matte` (and exercised by the tests):
/// posterior, prediction, fusion, refinement, update, trimap.
fn matte_frame(
    frame: &TestFrame,
    background_rgb: &depthmatte::imgcore::RgbImage,
    model: &depthmatte::bgmodel::BackgroundDepthModel,
    predictor: &dyn RawAlphaPredictor,
    config: &PipelineConfig,
) -> CmdResult<MatteOutputs> {
    let bayes = config.bayes();
    let refine_params = config.refine();
    let (qw, qh) = model.dims();
    let mut clock = StageClock::new();

    let a_depth = clock.run("depth_posterior", || {
        let depth_q = resize_nearest(&frame.depth, qw, qh)?;
        depth_posterior_map(&depth_q, model, &bayes)
    })?;
    let prediction = clock.run("predict", || {
        let p = predictor.predict(&frame.rgb, background_rgb, Some(&frame.depth))?;
        if p.a_raw.dims() != (qw, qh) {
            return Err(Error::DimensionMismatch {
                context: "predictor output vs quarter resolution",
                left_width: p.a_raw.dims().0,
                left_height: p.a_raw.dims().1,
                right_width: qw,
                right_height: qh,
            });
        }
        Ok(p)
    })?;
    let e_fused = clock.run("fuse", || {
        let e_d = residual_map(&a_depth, &prediction.a_raw)?;
        fuse_error_maps(&e_d, &prediction.e_rgb, config.beta)
    })?;
    let a_fine = clock.run("refine", || {
        refine_alpha(
            &frame.rgb,
            &frame.depth,
            &prediction.a_raw,
            &e_fused,
            &PassthroughRefiner,
            &refine_params,
        )
    })?;
    let a_post = clock.run("posterior_update", || {
        depth_posterior_update(&a_fine, &frame.depth, model, &bayes)
    })?;
    let trimap = clock.run("trimap", || make_trimap(&a_post, &refine_params))?;
    Ok((a_fine, a_post, trimap, clock))
}
