//! `bg-model`: estimate the per-pixel background depth distribution from a
//! scene's background captures and persist it.

use std::path::Path;

use depthmatte::bgmodel::{build_background_model, save_model};
use depthmatte::dataset::load_scene;
use depthmatte::imgcore::{quarter_dims, resize_nearest};

use crate::commands::{echo_config, CmdResult};
use crate::config::PipelineConfig;

pub fn run(scene_dir: &Path, out_path: &Path, config: &PipelineConfig, verbose: bool) -> CmdResult<()> {
    let scene = load_scene(scene_dir)?;
    let (w, h) = scene.dims();
    let (qw, qh) = quarter_dims(w, h);
    if verbose {
        eprintln!(
            "building model from {} background maps at {qw}x{qh} (scene {w}x{h})",
            scene.backgrounds().len()
        );
    }

    let quarter: Vec<_> = scene
        .backgrounds()
        .iter()
        .map(|(_, depth)| resize_nearest(depth, qw, qh))
        .collect::<Result<_, _>>()?;
    let model = build_background_model(&quarter, config.psi, config.d_max)?;

    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    save_model(&model, out_path)?;
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            echo_config(parent, config)?;
        }
    }
    println!(
        "wrote background model {} ({qw}x{qh}, {} captures)",
        out_path.display(),
        scene.backgrounds().len()
    );
    Ok(())
}
