//! Depth-enhanced background matting pipeline.
//!
//! Subcommands: `bg-model` (estimate the background depth distribution),
//! `matte` (run the pipeline on one frame), `eval` (score mattes against
//! ground truth), `bench` (throughput of the non-neural stages), `synth`
//! (generate a synthetic scene). Exit codes: 0 success, 1 usage error,
//! 2 data/format error, 3 internal error.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::matte::{MatteArgs, PredictorChoice};
use commands::synth::SynthOverrides;
use commands::{CmdError, CmdResult, EXIT_USAGE};
use config::{PipelineConfig, Threads};

#[derive(Parser)]
#[command(
    name = "depthmatte",
    version,
    about = "Real-time depth-enhanced background matting pipeline"
)]
struct Cli {
    /// Pipeline configuration file (JSON, strict keys). Defaults apply
    /// when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads: "auto" or a fixed count. Overrides the config file.
    #[arg(long, global = true, value_name = "N|auto")]
    threads: Option<Threads>,

    /// Chatty progress on stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the per-pixel background depth model from a scene's captures.
    BgModel {
        /// Scene directory (capture layout).
        #[arg(long, value_name = "DIR")]
        scene: PathBuf,
        /// Output model file.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Run the matting pipeline on one test frame.
    Matte {
        /// Scene directory (capture layout).
        #[arg(long, value_name = "DIR")]
        scene: PathBuf,
        /// Test frame id, e.g. "00".
        #[arg(long, value_name = "ID")]
        frame: String,
        /// Background model file from `bg-model`.
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Output directory for alpha.png, alpha_post.png, trimap.png.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Raw alpha predictor.
        #[arg(long, value_enum, default_value = "depth-baseline")]
        predictor: PredictorChoice,
        /// Directory of <frame>_araw.png / <frame>_ergb.png for --predictor file.
        #[arg(long, value_name = "DIR")]
        predictor_dir: Option<PathBuf>,
    },
    /// Score predicted mattes against a scene's ground truth.
    Eval {
        /// Directory of predictions (<id>_alpha.png or <id>/alpha.png).
        #[arg(long, value_name = "DIR")]
        pred: PathBuf,
        /// Scene directory with ground-truth alphas.
        #[arg(long, value_name = "DIR")]
        scene: PathBuf,
        /// Report path; CSV is written here, JSON beside it.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Measure non-neural pipeline throughput on synthetic frames.
    Bench {
        /// Frame width in pixels.
        #[arg(long, default_value_t = 1920)]
        width: usize,
        /// Frame height in pixels.
        #[arg(long, default_value_t = 1080)]
        height: usize,
        /// Timed frames (one untimed warmup runs first).
        #[arg(long, default_value_t = 60)]
        frames: usize,
        /// Output directory for bench_report.json.
        #[arg(long, value_name = "DIR", default_value = "bench_out")]
        out: PathBuf,
    },
    /// Generate a synthetic RGB-D scene with exact ground truth.
    Synth {
        /// Scene spec file (JSON, strict keys); defaults apply when omitted.
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
        /// Output scene directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        overrides: SynthOverrides,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Requested help/version is a success; anything else is misuse.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> CmdResult<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.rayon_count())
        .build_global()
        .map_err(CmdError::internal)?;
    if cli.verbose {
        eprintln!("threads: {} ({} effective)", config.threads, rayon::current_num_threads());
    }

    match &cli.command {
        Command::BgModel { scene, out } => commands::bg_model::run(scene, out, &config, cli.verbose),
        Command::Matte {
            scene,
            frame,
            model,
            out,
            predictor,
            predictor_dir,
        } => commands::matte::run(
            &MatteArgs {
                scene_dir: scene.clone(),
                frame_id: frame.clone(),
                model_path: model.clone(),
                out_dir: out.clone(),
                predictor: *predictor,
                predictor_dir: predictor_dir.clone(),
            },
            &config,
            cli.verbose,
        ),
        Command::Eval { pred, scene, out } => {
            commands::eval::run(pred, scene, out, &config, cli.verbose)
        }
        Command::Bench {
            width,
            height,
            frames,
            out,
        } => commands::bench::run(*width, *height, *frames, out, &config),
        Command::Synth {
            spec,
            out,
            overrides,
        } => commands::synth::run(spec.as_deref(), overrides, out, cli.verbose),
    }
}
