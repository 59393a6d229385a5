//! `edgegrasp` command-line tool.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "edgegrasp",
    version,
    about = "Grasp handle detection for parallel-jaw grippers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect and rank handles in one RGB-D frame.
    Detect(DetectArgs),
    /// Render the synthetic scene catalogue with ground truth.
    Synth(SynthArgs),
    /// Score the detector on a directory of rendered scenes.
    Eval(EvalArgs),
    /// Draw a handles file over its frame.
    Viz(VizArgs),
}

#[derive(Args)]
pub struct DetectArgs {
    /// Color PNG (8-bit RGB).
    #[arg(long, requires_all = ["depth", "intrinsics"], conflicts_with = "pcd")]
    pub color: Option<PathBuf>,
    /// Depth PNG (16-bit, scaled by the intrinsics' depth_scale).
    #[arg(long, requires = "color")]
    pub depth: Option<PathBuf>,
    /// Intrinsics TOML.
    #[arg(long, requires = "color")]
    pub intrinsics: Option<PathBuf>,
    /// Organized ASCII PCD file instead of color/depth images.
    #[arg(long, required_unless_present = "color")]
    pub pcd: Option<PathBuf>,
    /// Gripper TOML (`l`, `t`, `w`, `d` in meters); overrides the config's.
    #[arg(long)]
    pub gripper: Option<PathBuf>,
    /// Detector config TOML; defaults apply to anything it leaves out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an overlay PNG.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Render the standard catalogue (currently the only source).
    #[arg(long, required = true)]
    pub suite: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Override the depth noise (m) of every scene.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Directory of scene directories as written by `synth`.
    #[arg(long)]
    pub scenes_dir: PathBuf,
    /// Match criteria TOML (`center`, `axis_deg`, `width_tolerance`).
    #[arg(long)]
    pub criteria: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub report: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Args)]
pub struct VizArgs {
    /// Frame directory (color.png, depth.png, intrinsics.toml) or a PCD file.
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub handles: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Config used to re-segment the frame for the boundary layer.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => commands::detect(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Viz(a) => commands::viz(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
