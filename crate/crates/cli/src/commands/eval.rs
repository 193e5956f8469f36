//! `eval`: score predicted mattes against a scene's ground truth and write
//! the CSV + JSON metric reports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use depthmatte::dataset::{ground_truth_by_id, load_scene, test_frame_ids};
use depthmatte::imgcore::load_scalar_png;
use depthmatte::metrics::{evaluate, mean_report, MetricParams, MetricReport, REPORT_CSV_HEADER};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{echo_config, write_json, CmdError, CmdResult};
use crate::config::PipelineConfig;

#[derive(Serialize)]
struct EvalReport {
    metric_params: MetricParamsEcho,
    rows: Vec<MetricReport>,
    mean: Option<MetricReport>,
    evaluated: usize,
    skipped_missing_gt: Vec<String>,
    skip_count: usize,
}

/// Metric constants echoed into the report so numbers are interpretable.
#[derive(Serialize)]
struct MetricParamsEcho {
    grad_sigma: f64,
    conn_step: f64,
    conn_gate: f64,
}

/// Prediction file for a frame: `<id>_alpha.png`, or `<id>/alpha.png` (the
/// per-frame matte output layout).
fn prediction_path(pred_dir: &Path, id: &str) -> CmdResult<PathBuf> {
    let flat = pred_dir.join(format!("{id}_alpha.png"));
    if flat.is_file() {
        return Ok(flat);
    }
    let nested = pred_dir.join(id).join("alpha.png");
    if nested.is_file() {
        return Ok(nested);
    }
    Err(CmdError::data(anyhow::anyhow!(
        "no prediction for frame {id}: neither {} nor {} exists",
        flat.display(),
        nested.display()
    )))
}

pub fn run(
    pred_dir: &Path,
    scene_dir: &Path,
    report_path: &Path,
    config: &PipelineConfig,
    verbose: bool,
) -> CmdResult<()> {
    let scene = load_scene(scene_dir)?;
    let ids = test_frame_ids(scene_dir)?;
    if ids.is_empty() {
        return Err(CmdError::data(anyhow::anyhow!(
            "scene {} has no test frames to evaluate",
            scene_dir.display()
        )));
    }
    let gt_by_id = ground_truth_by_id(&scene);
    let params: MetricParams = config.metrics();

    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for id in &ids {
        match gt_by_id.get(id) {
            Some(gt) => jobs.push((id.clone(), prediction_path(pred_dir, id)?, *gt)),
            None => {
                eprintln!("warning: frame {id} has no ground-truth alpha, skipping");
                skipped.push(id.clone());
            }
        }
    }

    // Frames are scored in parallel; `collect` keeps report order by id.
    let rows: Vec<MetricReport> = jobs
        .par_iter()
        .map(|(id, path, gt)| -> CmdResult<MetricReport> {
            let t0 = Instant::now();
            let pred = load_scalar_png(path)?;
            let wall = t0.elapsed().as_secs_f64() * 1e3;
            evaluate(id, &pred, gt, &params, wall)
                .map_err(|e| CmdError::data(e).context(format!("evaluating frame {id}")))
        })
        .collect::<CmdResult<_>>()?;

    let mean = mean_report(&rows);
    let mut csv = String::from(REPORT_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    if let Some(m) = &mean {
        csv.push_str(&m.csv_row());
        csv.push('\n');
    }

    let (csv_path, json_path) = match report_path.extension().and_then(|e| e.to_str()) {
        Some("json") => (report_path.with_extension("csv"), report_path.to_path_buf()),
        _ => (report_path.to_path_buf(), report_path.with_extension("json")),
    };
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&csv_path, &csv)
        .map_err(|e| CmdError::data(e).context(format!("writing {}", csv_path.display())))?;

    let report = EvalReport {
        metric_params: MetricParamsEcho {
            grad_sigma: params.grad_sigma,
            conn_step: params.conn_step,
            conn_gate: params.conn_gate,
        },
        evaluated: rows.len(),
        skip_count: skipped.len(),
        skipped_missing_gt: skipped,
        mean,
        rows,
    };
    write_json(&json_path, &report)?;
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            echo_config(parent, config)?;
        }
    }

    if verbose {
        if let Some(m) = &report.mean {
            eprintln!("mean: {}", m.csv_row());
        }
    }
    println!(
        "evaluated {} frame(s) ({} skipped), wrote {} and {}",
        report.evaluated,
        report.skip_count,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}
