//! `bench`: throughput of the non-neural pipeline stages on synthetic
//! frames. Network inference and file I/O are out of scope; the report says
//! so to keep comparisons honest.

use std::path::Path;
use std::time::Instant;

use depthmatte::bayes::depth_posterior_map;
use depthmatte::bgmodel::build_background_model;
use depthmatte::dataset::{gen_synthetic_scene, DiskSpec, SynthSpec};
use depthmatte::fusion::{fuse_error_maps, residual_map};
use depthmatte::imgcore::{quarter_dims, resize_nearest, upsample_bilinear, ScalarMap};
use depthmatte::refine::{depth_posterior_update, make_trimap, select_patches};
use serde::Serialize;

use crate::commands::{echo_config, write_json, CmdError, CmdResult};
use crate::config::PipelineConfig;

/// Mean frame budget asserted by the throughput gate, in milliseconds.
pub const BUDGET_MS: f64 = 33.0;

const SCOPE_NOTE: &str = "non-neural stages only (posterior, fusion, selection, upsample, \
     depth-conditioned update, trimap); RGB network inference and file I/O excluded";

#[derive(Serialize, Clone, Copy)]
pub struct StageStats {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p99_ms: f64,
}

#[derive(Serialize)]
pub struct StageRow {
    pub stage: String,
    #[serde(flatten)]
    pub stats: StageStats,
}

#[derive(Serialize)]
pub struct BenchReport {
    pub resolution: String,
    pub quarter_resolution: String,
    pub frames: usize,
    pub threads: usize,
    pub scope: String,
    pub stages: Vec<StageRow>,
    pub total: StageStats,
    pub fps: f64,
    pub budget_ms: f64,
    pub within_budget: bool,
}

/// Nearest-rank percentile of an unsorted sample set.
fn percentile(samples: &[f64], q: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn stats(samples: &[f64]) -> StageStats {
    StageStats {
        mean_ms: samples.iter().sum::<f64>() / samples.len() as f64,
        p50_ms: percentile(samples, 50.0),
        p99_ms: percentile(samples, 99.0),
    }
}

/// Positive pseudo-random error map: keeps every selection cell nonzero so
/// the sort pays its worst-case cost.
fn synthetic_error_map(w: usize, h: usize) -> ScalarMap {
    let data: Vec<f32> = (0..w * h)
        .map(|i| {
            let mut x = (i as u64).wrapping_mul(0x9e3779b97f4a7c15) ^ 0xE44;
            x ^= x >> 31;
            x = x.wrapping_mul(0xbf58476d1ce4e5b9);
            ((x % 1000) + 1) as f32 / 1000.0
        })
        .collect();
    ScalarMap::new(w, h, data).expect("values are in (0, 1]")
}

pub fn measure(
    width: usize,
    height: usize,
    frames: usize,
    config: &PipelineConfig,
) -> CmdResult<BenchReport> {
    if width == 0 || height == 0 || frames == 0 {
        return Err(CmdError::usage("bench needs positive width, height, and frames"));
    }
    let (qw, qh) = quarter_dims(width, height);
    let bayes = config.bayes();
    let refine_params = config.refine();

    // Fixed-seed scene; generation happens outside every timed section.
    let spec = SynthSpec {
        seed: 20,
        width,
        height,
        fg_shape: DiskSpec {
            center_x: width as f64 / 2.0,
            center_y: height as f64 / 2.0,
            radius: width.min(height) as f64 / 4.0,
            aa_width: 2.0,
        },
        n_backgrounds: 4,
        n_tests: frames.min(3),
        ..SynthSpec::default()
    };
    let scene = gen_synthetic_scene(&spec).map_err(CmdError::data)?;
    let quarter_bgs: Vec<_> = scene
        .backgrounds()
        .iter()
        .map(|(_, d)| resize_nearest(d, qw, qh))
        .collect::<Result<_, _>>()?;
    let model = build_background_model(&quarter_bgs, config.psi, config.d_max)?;
    let e_rgb = synthetic_error_map(qw, qh);

    let stage_names = [
        "depth_posterior",
        "fusion",
        "selection",
        "upsample",
        "posterior_update",
        "trimap",
    ];
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(frames); stage_names.len()];
    let mut totals: Vec<f64> = Vec::with_capacity(frames);

    // One untimed warmup iteration, then the measured run.
    for iteration in 0..frames + 1 {
        let frame = &scene.tests()[iteration % scene.tests().len()];
        let mut stage_ms = [0.0f64; 6];

        let t = Instant::now();
        let depth_q = resize_nearest(&frame.depth, qw, qh)?;
        let a_depth = depth_posterior_map(&depth_q, &model, &bayes)?;
        stage_ms[0] = t.elapsed().as_secs_f64() * 1e3;

        // The raw matte reuses the posterior: network inference is not part
        // of the benchmark scope.
        let a_raw = &a_depth;

        let t = Instant::now();
        let e_d = residual_map(&a_depth, a_raw)?;
        let e_fused = fuse_error_maps(&e_d, &e_rgb, config.beta)?;
        stage_ms[1] = t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let grid = select_patches(&e_fused, &refine_params)?;
        stage_ms[2] = t.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(&grid);

        let t = Instant::now();
        let a_fine = upsample_bilinear(a_raw, width, height)?;
        stage_ms[3] = t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let a_post = depth_posterior_update(&a_fine, &frame.depth, &model, &bayes)?;
        stage_ms[4] = t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let trimap = make_trimap(&a_post, &refine_params)?;
        stage_ms[5] = t.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(&trimap);

        if iteration > 0 {
            for (vec, ms) in samples.iter_mut().zip(stage_ms) {
                vec.push(ms);
            }
            totals.push(stage_ms.iter().sum());
        }
    }

    let total = stats(&totals);
    Ok(BenchReport {
        resolution: format!("{width}x{height}"),
        quarter_resolution: format!("{qw}x{qh}"),
        frames,
        threads: rayon::current_num_threads(),
        scope: SCOPE_NOTE.to_string(),
        stages: stage_names
            .iter()
            .zip(&samples)
            .map(|(name, s)| StageRow {
                stage: (*name).to_string(),
                stats: stats(s),
            })
            .collect(),
        fps: 1000.0 / total.mean_ms,
        within_budget: total.mean_ms <= BUDGET_MS,
        budget_ms: BUDGET_MS,
        total,
    })
}

pub fn run(
    width: usize,
    height: usize,
    frames: usize,
    out_dir: &Path,
    config: &PipelineConfig,
) -> CmdResult<()> {
    let report = measure(width, height, frames, config)?;

    println!(
        "benchmark at {} ({} quarter), {} frame(s), {} thread(s)",
        report.resolution, report.quarter_resolution, report.frames, report.threads
    );
    println!("scope: {}", report.scope);
    println!("{:>18} {:>10} {:>10} {:>10}", "stage", "mean ms", "p50 ms", "p99 ms");
    for row in &report.stages {
        println!(
            "{:>18} {:>10.3} {:>10.3} {:>10.3}",
            row.stage, row.stats.mean_ms, row.stats.p50_ms, row.stats.p99_ms
        );
    }
    println!(
        "{:>18} {:>10.3} {:>10.3} {:>10.3}  ({:.1} FPS)",
        "total", report.total.mean_ms, report.total.p50_ms, report.total.p99_ms, report.fps
    );
    if report.within_budget {
        println!("within budget: {:.3} ms <= {} ms", report.total.mean_ms, report.budget_ms);
    } else {
        println!(
            "WARNING: mean frame time {:.3} ms exceeds the {} ms budget on this machine",
            report.total.mean_ms, report.budget_ms
        );
    }

    std::fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("bench_report.json"), &report)?;
    echo_config(out_dir, config)?;
    println!("wrote {}", out_dir.join("bench_report.json").display());
    Ok(())
}
