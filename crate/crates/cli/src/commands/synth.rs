//! `synth`: generate a synthetic RGB-D scene with exact ground truth and
//! write it in the capture layout.

use std::path::{Path, PathBuf};

use depthmatte::dataset::{gen_synthetic_scene, save_scene, SynthSpec};

use crate::commands::{write_json, CmdError, CmdResult};

/// Flag overrides applied on top of the spec file (or the default spec).
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SynthOverrides {
    /// Scene seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frame width in pixels.
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height in pixels.
    #[arg(long)]
    pub height: Option<usize>,
    /// Number of background captures.
    #[arg(long)]
    pub backgrounds: Option<usize>,
    /// Number of test frames.
    #[arg(long)]
    pub tests: Option<usize>,
    /// Fraction of depth pixels reported as unknown.
    #[arg(long)]
    pub dropout: Option<f64>,
}

pub fn run(
    spec_path: Option<&Path>,
    overrides: &SynthOverrides,
    out_dir: &PathBuf,
    verbose: bool,
) -> CmdResult<()> {
    let mut spec = match spec_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CmdError::data(e).context(format!("reading spec {}", path.display()))
            })?;
            serde_json::from_str::<SynthSpec>(&text).map_err(|e| {
                CmdError::data(e).context(format!("parsing spec {}", path.display()))
            })?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    if let Some(width) = overrides.width {
        spec.width = width;
    }
    if let Some(height) = overrides.height {
        spec.height = height;
    }
    if let Some(n) = overrides.backgrounds {
        spec.n_backgrounds = n;
    }
    if let Some(n) = overrides.tests {
        spec.n_tests = n;
    }
    if let Some(rate) = overrides.dropout {
        spec.dropout_rate = rate;
    }

    let scene = gen_synthetic_scene(&spec)?;
    save_scene(out_dir, &scene)?;
    // The generating spec plays the role of the effective config here: it
    // alone determines the scene bytes.
    write_json(&out_dir.join("spec.json"), &spec)?;

    if verbose {
        eprintln!("spec: {spec:?}");
    }
    println!(
        "wrote scene {} ({}x{}, {} backgrounds, {} test frames, seed {})",
        out_dir.display(),
        spec.width,
        spec.height,
        spec.n_backgrounds,
        spec.n_tests,
        spec.seed
    );
    Ok(())
}
